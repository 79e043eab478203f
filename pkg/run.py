"""Simple script to run the tracking API server."""
import os

import uvicorn

if __name__ == "__main__":
    uvicorn.run(
        "src.api.main:app",
        host=os.getenv("FACT_API_HOST", "0.0.0.0"),
        port=int(os.getenv("FACT_API_PORT", "8000")),
        reload=os.getenv("DEBUG", "false").lower() == "true",
    )
