"""Attention visualization: static HTML with per-token highlighting plus a
JSON dump of the pooling weights."""

from __future__ import annotations

import html
import json
from pathlib import Path

HEADER = """<!DOCTYPE html>
<html><head><meta charset="utf-8"><title>attention weights</title>
<style>
body { font-family: sans-serif; margin: 2em; }
.example { margin-bottom: 1.5em; }
.channel { margin: 0.3em 0; }
.label { display: inline-block; width: 6em; color: #555; font-size: 0.85em; }
.tok { padding: 1px 3px; border-radius: 3px; margin-right: 2px; }
</style></head><body>
"""


def _token_span(token, weight):
    return (f'<span class="tok" style="background: rgba(220, 60, 40, '
            f'{weight:.4f})" title="{weight:.4f}">{html.escape(token)}</span>')


def render_html(rows) -> str:
    """rows: list of dicts {id, tokens, gold, pred, channels: {name: [w]}}."""
    parts = [HEADER]
    for row in rows:
        parts.append(f'<div class="example"><h3>{html.escape(row["id"])} '
                     f'&mdash; gold: {html.escape(row["gold"])}, '
                     f'predicted: {html.escape(row["pred"])}</h3>')
        for name, weights in row["channels"].items():
            peak = max(weights) or 1.0
            toks = "".join(_token_span(t, w / peak)
                           for t, w in zip(row["tokens"], weights))
            parts.append(f'<div class="channel"><span class="label">'
                         f'{html.escape(name)}</span>{toks}</div>')
        parts.append("</div>")
    parts.append("</body></html>\n")
    return "\n".join(parts)


def export(rows, html_path) -> None:
    """Write the HTML page and the raw weights next to it as JSON."""
    html_path = Path(html_path)
    html_path.write_text(render_html(rows), encoding="utf-8")
    dump = [{"id": r["id"], "gold": r["gold"], "pred": r["pred"],
             "tokens": r["tokens"],
             "channels": {k: list(map(float, v))
                          for k, v in r["channels"].items()}}
            for r in rows]
    html_path.with_suffix(".json").write_text(
        json.dumps(dump, indent=2, sort_keys=True), encoding="utf-8")
