"""Deterministic reports: canonical JSON plus plot-ready CSV emission.

Identical configs must reproduce identical bytes, so serialization is
canonical (sorted keys, shortest-repr floats) and every report embeds the
sha256 of its canonical config.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

TOOL_NAME = "meanosc"
TOOL_VERSION = "0.1.0"


def canonical_bytes(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=False).encode()


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_bytes(config)).hexdigest()


def profile_dict(p) -> dict:
    out = {
        "regime": p.regime,
        "params": list(p.params),
        "values": list(p.values),
        "verdict": p.verdict,
        "witness": p.witness,
        "threshold": p.threshold,
    }
    if p.per_length:
        out["per_length"] = {str(k): list(v) if not isinstance(v, str) else v
                             for k, v in p.per_length.items()}
    return out


def make_report(subcommand: str, config: dict, results: dict,
                profiles: list | None = None) -> dict:
    return {
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "subcommand": subcommand,
        "config_sha256": config_hash(config),
        "results": results,
        "profiles": profiles or [],
    }


def write_report(report: dict, out_dir: str | Path, name: str = "report.json") -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_bytes(canonical_bytes(report) + b"\n")
    return path


def emit_plot_data(report: dict, out_dir: str | Path) -> list[Path]:
    """One CSV per profile, header `parameter,value,regime`, deterministic order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for k, prof in enumerate(report.get("profiles", [])):
        regime = prof.get("regime", f"profile{k}")
        label = prof.get("label", "")
        stem = f"profile_{k:02d}_{_slug(label)}_{_slug(regime)}".strip("_")
        path = out / f"{stem}.csv"
        lines = ["parameter,value,regime"]
        for p, v in zip(prof.get("params", []), prof.get("values", [])):
            lines.append(f"{p!r},{v!r},{regime}")
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    return written


def _slug(s: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "-" for c in str(s))
