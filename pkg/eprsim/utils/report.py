"""
Serialize experiment reports as JSON or single-row CSV

JSON output has sorted keys and two-space indentation. CSV output flattens
nested keys with '_' and matrices row-major, so an empirical joint stored
under 'p' becomes columns p_0_0, p_0_1, ...

Both formats are byte-stable: the same report dict always gives the same text.

DATES : 2026-10-17 From scratch
"""

import io
import json
import sys

import numpy as np
import pandas as pd

# Significant digits for CSV floats
CSV_FLOAT_FORMAT = '%0.12g'


def flatten_report(report, prefix=''):
    """
    Flatten a nested report dict into an ordered {column: scalar} dict

    :param report: dict
    :param prefix: str
        Column name prefix for nested calls
    :return: dict
    """

    flat = {}

    for key in sorted(report):

        name = f'{prefix}{key}'
        value = report[key]

        if isinstance(value, dict):
            flat.update(flatten_report(value, prefix=f'{name}_'))

        elif isinstance(value, (list, tuple)):
            arr = np.asarray(value)
            for idx in np.ndindex(arr.shape):
                flat[name + ''.join(f'_{k}' for k in idx)] = arr[idx].item()

        else:
            flat[name] = value

    return flat


def format_report(report, fmt='json'):
    """
    Render a report dict as text

    :param report: dict
    :param fmt: str
        'json' or 'csv'
    :return: str
    """

    if fmt == 'json':
        return json.dumps(report, sort_keys=True, indent=2) + '\n'

    if fmt == 'csv':
        report_df = pd.DataFrame([flatten_report(report)])
        buf = io.StringIO()
        report_df.to_csv(buf, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
        return buf.getvalue()

    raise ValueError(f'Unknown report format {fmt!r}')


def write_report(report, fmt='json', out_fname=None):
    """
    Write a report to a file, or to stdout if no filename is given
    """

    text = format_report(report, fmt)

    if out_fname:
        with open(out_fname, 'w', encoding='utf-8', newline='') as fd:
            fd.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
