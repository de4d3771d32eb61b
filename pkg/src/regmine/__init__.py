"""regmine: regression analysis for evolving programs.

The pipeline mines behavioral properties (value invariants and
call-sequence automata) from executions of a base program version, prunes
inaccurate ones by exhaustive verification over declared input domains,
classifies properties intentionally invalidated by an upgrade as obsolete,
explains regression failures through violations of the surviving up-to-date
properties, and detects regression faults no test has revealed.
"""

from .analyzer import (
    Anomaly,
    CauseEffectGraph,
    RegressionFaultReport,
    build_chains,
    classify_obsolete,
    detect_anomalies,
    static_check,
)
from .checking import Violation, check_trace
from .mining import build_pta, ktail_merge, mine_automata, mine_invariants, mine_properties
from .properties import (
    AutomatonProperty,
    Dfa,
    InvariantProperty,
    Property,
    PropertyStatus,
    decode_properties,
    encode_properties,
)
from .report import build_report, prioritize, render_html, render_text
from .scope import build_plan
from .tracefile import (
    MonitorPlan,
    Trace,
    TraceEvent,
    decode_plan,
    decode_traces,
    encode_plan,
    encode_traces,
)
from .verify import Verdict, VerdictKind, prune, survivors, verify_property

__version__ = "0.1.0"

__all__ = [
    "Anomaly",
    "CauseEffectGraph",
    "RegressionFaultReport",
    "build_chains",
    "classify_obsolete",
    "detect_anomalies",
    "static_check",
    "Violation",
    "check_trace",
    "build_pta",
    "ktail_merge",
    "mine_automata",
    "mine_invariants",
    "mine_properties",
    "AutomatonProperty",
    "Dfa",
    "InvariantProperty",
    "Property",
    "PropertyStatus",
    "decode_properties",
    "encode_properties",
    "build_report",
    "prioritize",
    "render_html",
    "render_text",
    "build_plan",
    "MonitorPlan",
    "Trace",
    "TraceEvent",
    "decode_plan",
    "decode_traces",
    "encode_plan",
    "encode_traces",
    "Verdict",
    "VerdictKind",
    "prune",
    "survivors",
    "verify_property",
    "__version__",
]
