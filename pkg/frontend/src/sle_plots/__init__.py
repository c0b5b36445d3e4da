"""Offline rendering of sle-lab exports."""

from .render import KINDS, PlotJob, RenderInfo, endpoint_pdf, render

__version__ = "0.1.0"
