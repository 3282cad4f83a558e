"""Figure rendering for topobatt CSV output.

Consumes only the documented CSV schemas of the main package; no physics
is recomputed here beyond axis transforms.
"""

__version__ = "0.1.0"

from .schema import SchemaReport, verify_schema
from .render import PlotSpec, render

__all__ = ["PlotSpec", "SchemaReport", "render", "verify_schema", "__version__"]
