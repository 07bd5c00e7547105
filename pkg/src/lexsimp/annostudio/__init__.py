"""Dataset-construction service: candidate pools, machine pre-annotation,
human judgments, consistency reporting, and final-dataset export."""

from .models import (
    AddedSubstitute,
    AnnotationTask,
    ConsistencyReport,
    Judgment,
    SourceInstance,
    TargetRef,
)
from .ops import audit_ratio, build_tasks, consistency_report, export_dataset, preannotate
from .store import AnnoStore

__all__ = [
    "AddedSubstitute",
    "AnnotationTask",
    "AnnoStore",
    "ConsistencyReport",
    "Judgment",
    "SourceInstance",
    "TargetRef",
    "audit_ratio",
    "build_tasks",
    "consistency_report",
    "export_dataset",
    "preannotate",
]
