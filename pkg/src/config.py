import os
from dotenv import load_dotenv

load_dotenv()

# FAC learner
FACT_GAMMA = float(os.getenv("FACT_GAMMA", "1.0"))
FACT_D_ET = int(os.getenv("FACT_D_ET", "3000"))  # ET layer transformation size
FACT_SEED = int(os.getenv("FACT_SEED", "0"))

# Association thresholds (distance form)
FACT_TAU_AFF = float(os.getenv("FACT_TAU_AFF", "0.3"))
FACT_TAU_COS = float(os.getenv("FACT_TAU_COS", "0.45"))
FACT_TAU_IOU = float(os.getenv("FACT_TAU_IOU", "0.5"))
FACT_TAU_NEW = float(os.getenv("FACT_TAU_NEW", "0.6"))
FACT_GATE_THRESHOLD = float(os.getenv("FACT_GATE_THRESHOLD", "9.4877"))  # chi2 0.95, 4 dof

# Track lifecycle
FACT_N_INIT = int(os.getenv("FACT_N_INIT", "3"))
FACT_EMA_ALPHA = float(os.getenv("FACT_EMA_ALPHA", "0.9"))
FACT_MAX_LOST_FRAMES = int(os.getenv("FACT_MAX_LOST_FRAMES", "30"))
FACT_CONFIRM_HITS = int(os.getenv("FACT_CONFIRM_HITS", "2"))
FACT_MIN_BOX_CONFIDENCE = float(os.getenv("FACT_MIN_BOX_CONFIDENCE", "0.1"))

# Post-processing
FACT_INTERPOLATION_MAX_GAP = int(os.getenv("FACT_INTERPOLATION_MAX_GAP", "20"))

LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# JSON schemas for scenario files
SCHEMAS_DIR = os.getenv(
    "SCHEMAS_DIR",
    os.path.join(os.path.dirname(os.path.dirname(__file__)), "schemas"),
)
