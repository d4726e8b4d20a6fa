"""
JSON-based result persistence.

Results are written with sorted keys so identical runs give byte-identical
files; wall-clock metadata goes to a separate <file>.meta.json sidecar.
"""

import json
import logging
import os
from datetime import datetime
from typing import Any, Dict, List, Optional

from src import __version__
from src.domain.errors import ParameterError

logger = logging.getLogger(__name__)


def dumps(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


class JsonResultRepository:
    """JSON file-based result repository rooted at an output directory."""

    def __init__(self, output_dir: str = "."):
        self.output_dir = output_dir

    def resolve(self, path: str) -> str:
        return path if os.path.isabs(path) else os.path.join(self.output_dir, path)

    def _write(self, path: str, text: str) -> None:
        directory = os.path.dirname(path)
        if directory and not os.path.exists(directory):
            os.makedirs(directory, exist_ok=True)
        temp_file = path + ".tmp"
        try:
            with open(temp_file, "w", encoding="utf-8") as f:
                f.write(text)
            os.replace(temp_file, path)
        except OSError as e:
            logger.error(f"Error saving results to {path}: {e}")
            if os.path.exists(temp_file):
                os.remove(temp_file)
            raise

    def save(self, path: str, payload: Dict[str, Any], command: Optional[List[str]] = None) -> str:
        """Write payload and its metadata sidecar; returns the resolved path."""
        target = self.resolve(path)
        self._write(target, dumps(payload))
        metadata = {
            "created_at": datetime.now().isoformat(),
            "version": __version__,
            "command": command or [],
        }
        self._write(target + ".meta.json", dumps(metadata))
        logger.info(f"Saved results to {target}")
        return target

    def load(self, path: str) -> Dict[str, Any]:
        target = self.resolve(path)
        try:
            with open(target, "r", encoding="utf-8") as f:
                data = json.load(f)
        except OSError as e:
            raise ParameterError(f"cannot read {target}: {e}") from e
        except json.JSONDecodeError as e:
            raise ParameterError(f"{target} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ParameterError(f"{target} must contain a JSON object")
        return data

    def get_metadata(self, path: str) -> Dict[str, Any]:
        sidecar = self.resolve(path) + ".meta.json"
        if not os.path.exists(sidecar):
            return {}
        with open(sidecar, "r", encoding="utf-8") as f:
            return json.load(f)
