from .report import flatten_report, format_report, write_report
