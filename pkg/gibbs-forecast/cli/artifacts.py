"""
Artifact writers. Every file carries the run fingerprint and is byte-stable for
a given configuration: JSON through orjson with sorted keys, floats as
shortest round-trip text, SVG with a fixed hash salt and no date.
"""

from __future__ import annotations

import os
from typing import Any, Dict, Iterable, List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
import orjson  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from forecaster import BandRow, ForecastRecord  # noqa: E402
from middleware.log import get_logger  # noqa: E402

logger = get_logger(__name__)

RECORD_COLUMNS = ("period", "tau", "lambda", "prediction", "realized", "loss", "flags")
SVG_SALT = "gibbs-forecast"


def _text(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def _prepare(path: str) -> str:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    return path


def comment_line(fingerprint: str) -> str:
    return f"# run_config={fingerprint}\n"


def write_json(path: str, payload: Dict[str, Any]) -> str:
    data = orjson.dumps(
        payload,
        option=orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY | orjson.OPT_APPEND_NEWLINE,
        default=str,
    )
    with open(_prepare(path), "wb") as handle:
        handle.write(data)
    logger.debug("artifact_written", path=path, bytes=len(data))
    return path


def _write_frame(path: str, frame: pd.DataFrame, fingerprint: str) -> str:
    with open(_prepare(path), "w", encoding="utf-8", newline="") as handle:
        handle.write(comment_line(fingerprint))
        frame.to_csv(handle, index=False, lineterminator="\n")
    logger.debug("artifact_written", path=path, rows=len(frame))
    return path


def record_to_dict(record: ForecastRecord) -> Dict[str, Any]:
    return {
        "period": record.period,
        "tau": record.tau,
        "lambda": record.lambda_used,
        "prediction": record.prediction,
        "realized": record.realized,
        "loss": record.loss,
        "flags": list(record.flags),
        "estimator": record.estimator,
    }


def write_records_csv(path: str, records: Iterable[ForecastRecord], fingerprint: str) -> str:
    """One row per record; Gibbs and comparator records go to separate files."""
    rows = [
        {
            "period": r.period,
            "tau": repr(r.tau),
            "lambda": _text(r.lambda_used),
            "prediction": _text(r.prediction),
            "realized": _text(r.realized),
            "loss": _text(r.loss),
            "flags": ";".join(r.flags),
        }
        for r in records
    ]
    return _write_frame(path, pd.DataFrame(rows, columns=list(RECORD_COLUMNS)), fingerprint)


def band_columns(bands: Sequence[BandRow]) -> List[str]:
    taus = [tau for tau, _ in bands[0].quantiles] if bands else []
    return ["period", *[f"q{tau:g}" for tau in taus], "realized", "rearranged"]


def write_fan_chart_csv(path: str, bands: Sequence[BandRow], fingerprint: str) -> str:
    """One row per period, one column per tau, quantiles already non-crossing."""
    columns = band_columns(bands)
    rows = []
    for band in bands:
        row = {"period": band.period}
        for tau, value in band.quantiles:
            row[f"q{tau:g}"] = _text(value)
        row["realized"] = _text(band.realized)
        row["rearranged"] = "true" if band.rearranged else "false"
        rows.append(row)
    return _write_frame(path, pd.DataFrame(rows, columns=columns), fingerprint)


def write_fan_chart_svg(path: str, bands: Sequence[BandRow], fingerprint: str, title: str = "") -> str:
    """Nested tau bands (outermost palest), the median when present, and realizations."""
    if not bands:
        raise ValueError("no bands to draw")
    taus = [tau for tau, _ in bands[0].quantiles]
    curves = np.array([[value for _, value in band.quantiles] for band in bands])
    x = np.arange(len(bands))

    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "none"}):
        fig = Figure(figsize=(10, 4.5))
        ax = fig.add_subplot()
        pairs = len(taus) // 2
        for i in range(pairs):
            alpha = 0.15 + 0.5 * (i + 1) / (pairs + 1)
            ax.fill_between(
                x,
                curves[:, i],
                curves[:, len(taus) - 1 - i],
                color="tab:blue",
                alpha=alpha,
                linewidth=0,
                label=f"{taus[i]:g}-{taus[len(taus) - 1 - i]:g}",
            )
        if len(taus) % 2:
            ax.plot(x, curves[:, pairs], color="tab:blue", linewidth=1.2, label=f"q{taus[pairs]:g}")
        realized = np.array([np.nan if b.realized is None else b.realized for b in bands])
        if np.any(np.isfinite(realized)):
            ax.plot(x, realized, "o", color="black", markersize=2.5, label="realized")

        step = max(1, len(bands) // 12)
        ax.set_xticks(x[::step])
        ax.set_xticklabels([b.period for b in bands][::step], rotation=45, ha="right", fontsize=8)
        ax.set_title(title)
        ax.legend(loc="upper left", fontsize=8, frameon=False)
        fig.tight_layout()
        fig.savefig(
            _prepare(path),
            format="svg",
            metadata={"Date": None, "Description": f"run_config={fingerprint}"},
        )
    logger.debug("artifact_written", path=path, periods=len(bands))
    return path
