"""Validates scenario files against JSON schemas."""
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from jsonschema import Draft7Validator, ValidationError

from src.config import SCHEMAS_DIR
from src.errors import ParseError
from src.synth.scenario import ScenarioConfig, make_scenario_config

logger = logging.getLogger(__name__)

SCENARIO_SCHEMA = "scenario"


class SchemaValidator:
    """Validates data against JSON schemas."""

    @staticmethod
    def load_schema(name: str) -> Dict[str, Any]:
        """
        Load ``<SCHEMAS_DIR>/<name>.json``.

        Raises:
            FileNotFoundError: If the schema file does not exist
        """
        path = Path(SCHEMAS_DIR) / f"{name}.json"
        if not path.exists():
            raise FileNotFoundError(f"Schema not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)

    @staticmethod
    def validate_data(data: Dict[str, Any], schema: Dict[str, Any]) -> Tuple[bool, Optional[str]]:
        """
        Check a decoded scenario document, reporting every violation at once.

        Returns:
            Tuple of (is_valid, error_message); the message lists one
            ``<field>: <problem>`` entry per violation, ordered by field path
        """
        validator = Draft7Validator(schema)
        errors = sorted(validator.iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
        if not errors:
            return True, None
        problems = [f"{_field_name(e)}: {e.message}" for e in errors]
        error_msg = f"scenario has {len(problems)} invalid field(s): " + "; ".join(problems)
        logger.warning(error_msg)
        return False, error_msg


def _field_name(error: ValidationError) -> str:
    """Dotted path of the offending field, e.g. ``occlusions.0.mode``."""
    if error.absolute_path:
        return ".".join(str(p) for p in error.absolute_path)
    return "<scenario>"


def load_scenario_file(path: Union[str, Path]) -> ScenarioConfig:
    """
    Read a scenario JSON file, check it against the scenario schema and build the config.

    Raises:
        ParseError: If the file is not JSON or fails schema validation
        InvalidArgumentError: If the document is well formed but inconsistent
            (e.g. an occlusion window past the last frame)
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", path=str(path), line=e.lineno) from e

    is_valid, error_msg = SchemaValidator.validate_data(data, SchemaValidator.load_schema(SCENARIO_SCHEMA))
    if not is_valid:
        raise ParseError(error_msg, path=str(path))
    logger.info(f"Loaded scenario file {path}")
    return make_scenario_config(**data)
