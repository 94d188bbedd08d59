from pathlib import Path
from typing import Any

import yaml

from sigsurv.common.exceptions import ConfigError


def load_yaml(path_to_yaml: Path) -> dict[str, Any]:
    """
    Load a YAML configuration document that must be a mapping at the top level.

    An empty document is read as an empty mapping so that a config file containing only
    comments falls back to every default.

    Args:
        path_to_yaml (Path): The file path to the YAML document.

    Returns:
        dict[str, Any]: The parsed top-level mapping.

    Raises:
        FileNotFoundError: If the specified file does not exist.
        ConfigError: If the file is not valid YAML or its top level is not a mapping.
    """
    try:
        with open(path_to_yaml, encoding="utf-8") as file:
            data = yaml.safe_load(file)
    except FileNotFoundError as e:
        raise FileNotFoundError(f"Config file not found: {path_to_yaml}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Error parsing YAML file {path_to_yaml}: {e}") from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Top level of {path_to_yaml} must be a mapping, got {type(data).__name__}")

    return data
