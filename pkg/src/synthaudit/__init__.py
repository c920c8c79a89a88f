"""synthaudit: fidelity, utility and privacy evaluation for synthetic tabular data."""

__version__ = "0.1.0"

from .table import ColumnSchema, Kind, LabelDistribution, Role, Table  # noqa: E402

__all__ = ["__version__", "ColumnSchema", "Kind", "LabelDistribution", "Role", "Table"]
