import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import pandas as pd
import yaml
from pydantic import ValidationError

from .errors import ParseError
from .models import Config, PmfDocument
from .probability import Channel, JointPmf, validate_pmf

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "mi_region" / "inputs.yaml"

PathLike = Union[str, Path]


def load_config(path: Optional[PathLike] = None) -> Config:
    path = Path(path) if path is not None else DEFAULT_CONFIG
    if not path.exists():
        logger.debug("no config at %s, using model defaults", path)
        return Config()
    with open(path, "r", encoding="utf-8") as f:
        raw = yaml.safe_load(f) or {}
    return Config(**raw)


def parse_pmf_document(text: str) -> PmfDocument:
    try:
        return PmfDocument.model_validate_json(text)
    except ValidationError as exc:
        raise ParseError(f"pmf document does not match the schema: {exc.errors(include_url=False)}") from exc


def load_pmf(path: PathLike) -> JointPmf:
    with open(path, "r", encoding="utf-8") as f:
        doc = parse_pmf_document(f.read())
    return validate_pmf(doc.pmf, doc.x_alphabet, doc.y_alphabet)


def pmf_document(p: JointPmf) -> dict:
    return {"x_alphabet": list(p.x_alphabet), "y_alphabet": list(p.y_alphabet), "pmf": p.p.tolist()}


def channel_document(c: Channel) -> list:
    return np.asarray(c.q).tolist()


def load_channel(raw) -> Channel:
    return Channel(np.asarray(raw, dtype=float))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True)


def write_report(report: dict, out: Optional[PathLike] = None) -> str:
    text = dumps(report)
    if out is None:
        print(text)
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")
    return text


def write_frame(df: pd.DataFrame, out: Optional[PathLike] = None, manifest: Optional[dict] = None) -> str:
    """CSV with a header row; the manifest rides along as a leading comment line."""
    text = df.to_csv(index=False, float_format="%.12g", lineterminator="\n")
    if manifest is not None:
        text = "# " + json.dumps(_jsonable(manifest), sort_keys=True) + "\n" + text
    if out is None:
        print(text, end="")
    else:
        Path(out).write_text(text, encoding="utf-8")
    return text
