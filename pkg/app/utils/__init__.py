from .logger import get_current_time, setup_logging, append_jsonl, read_jsonl
from .validators import validate_genotype_text, load_genotype_file, format_genotype, write_genotype_file

__all__ = [
    "get_current_time", "setup_logging", "append_jsonl", "read_jsonl",
    "validate_genotype_text", "load_genotype_file", "format_genotype", "write_genotype_file",
]
