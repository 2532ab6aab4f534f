"""Privacy policy engine for evolving social networks.

Members, a DAG of groups and per-owner content trees live in immutable
snapshots.  Owners attach visible/invisible assignments to groups or members;
rights are inherited down the group DAG and the content tree, overridden by
more specific assignments, and reconciled across alternative membership paths
by an optimistic or pessimistic protocol.
"""

from .assignments import Assignment, Mode, Protocol, clear_assignment, set_assignment, set_default_protocol
from .errors import BatchError, BindError, PvnError, PvnSyntaxError
from .evolution import apply_batch, diff_visibility, whatif
from .model import ALL, ContentId, GroupId, MemberId, NetworkSnapshot, member_closure, resolve_path
from .resolution import audience, explain, resolve, resolve_by_paths, visible_set

__version__ = "0.1.0"

__all__ = [
    "ALL",
    "Assignment",
    "BatchError",
    "BindError",
    "ContentId",
    "GroupId",
    "MemberId",
    "Mode",
    "NetworkSnapshot",
    "Protocol",
    "PvnError",
    "PvnSyntaxError",
    "apply_batch",
    "audience",
    "clear_assignment",
    "diff_visibility",
    "explain",
    "member_closure",
    "resolve",
    "resolve_by_paths",
    "resolve_path",
    "set_assignment",
    "set_default_protocol",
    "visible_set",
    "whatif",
]
