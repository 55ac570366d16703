"""Publication-style BER figures from oddm-thp result CSVs."""

from .render import FIGURE_KINDS, FigureSpec, RenderError, render

__version__ = "0.1.0"
