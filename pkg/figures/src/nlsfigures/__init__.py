"""Convergence-panel rendering for torusnls harness reports."""

from .render import (
    GroupRender,
    PanelSpec,
    RenderResult,
    SchemaError,
    render_convergence,
)

__version__ = "0.1.0"
