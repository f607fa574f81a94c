"""Adaptive learning-path engine backed by a truth maintenance network.

Student progress through a prerequisite curriculum is tracked as a private
justification network per enrollment; passing an assessment enables the
milestone's assumption node, label propagation unlocks downstream
milestones, and the adaptation layer turns network state plus attempt
history into ordered, explained recommendations.
"""

from .adaptation import Recommendation, StrugglePolicy, detect_struggle, recommend
from .curriculum import (
    Asset,
    AssetKind,
    Assessment,
    Curriculum,
    Milestone,
    Mode,
    Status,
    color_for,
    compile_network,
    export_dot,
    parse_curriculum,
    topological_order,
    validate_document,
)
from .jtms import Label, Network, NodeKind
from .sample import sample_course, sample_course_document
from .store import Service
from .students import Enrollment, mastery_from_score

__version__ = "0.1.0"

__all__ = [
    "Asset",
    "AssetKind",
    "Assessment",
    "Curriculum",
    "Enrollment",
    "Label",
    "Milestone",
    "Mode",
    "Network",
    "NodeKind",
    "Recommendation",
    "Service",
    "Status",
    "StrugglePolicy",
    "color_for",
    "compile_network",
    "detect_struggle",
    "export_dot",
    "mastery_from_score",
    "parse_curriculum",
    "recommend",
    "sample_course",
    "sample_course_document",
    "topological_order",
    "validate_document",
]
