"""Figure rendering for vessel trajectory-tracking trace CSVs.

Reads the published trace CSV schema and renders four deterministic
figure kinds: planar trajectory overlays, tracking-error time series with
the Lyapunov envelope, control-effort time series, and two-run
comparisons.
"""

from .figures import (FIGURE_KINDS, render, render_comparison, render_efforts,
                      render_errors, render_trajectory)
from .reader import TraceFormatError, load_trace, require_columns

__version__ = "0.1.0"
