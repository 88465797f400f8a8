"""Figure rendering for simulation trace CSVs."""

from .figures import PlotResult, plot_errors, plot_estimation
from .frames import SchemaError, TraceFrame, load_trace

__version__ = "0.1.0"
