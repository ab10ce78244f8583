from ._kidex import (
    Error,
    IngestError,
    IoError,
    RuleError,
    check_rules,
    extract,
    f_measure,
    fix_confusions,
    normalize_label,
    normalize_number,
    run_cli,
)

__all__ = [
    "Error",
    "IngestError",
    "IoError",
    "RuleError",
    "check_rules",
    "extract",
    "f_measure",
    "fix_confusions",
    "normalize_label",
    "normalize_number",
    "run_cli",
]
