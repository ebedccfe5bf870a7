import csv
import json

import pandas as pd
import yaml

from diva.constraints import UNBOUNDED, ConstraintSet, DiversityConstraint
from diva.errors import ParseError, SchemaError
from diva.parsing.loaders import generate_loader
from diva.relation import SUPPRESSED, Relation, Schema

STAR = "*"


############
## Format ##
############


def parse_yaml(file_path, loader=None):
    if loader is None:
        loader = generate_loader()
    with open(file_path) as inf:
        try:
            return yaml.load(inf, Loader=loader)
        except yaml.YAMLError as e:
            raise ParseError(f"{file_path}: malformed YAML: {e}") from None


def parse_json(file_path, loader=None):
    with open(file_path) as inf:
        try:
            return json.load(inf)
        except json.JSONDecodeError as e:
            raise ParseError(f"{file_path}: malformed JSON: {e}") from None


def _check_widths(file_path):
    with open(file_path, newline="") as inf:
        reader = csv.reader(inf)
        width = None
        for row in reader:
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(f"{file_path}: line {reader.line_num} has {len(row)} cells, the header has {width}")


def parse_csv(file_path, loader=None):
    """
    All cells as strings; the first row is the header. Empty cells stay empty
    strings, a row with more or fewer cells than the header is an error.
    """
    try:
        frame = pd.read_csv(file_path, header=None, dtype=str, keep_default_na=False, skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise ParseError(f"{file_path}: no header row") from None
    except pd.errors.ParserError as e:
        raise ParseError(f"{file_path}: malformed CSV: {e}") from None
    _check_widths(file_path)
    return frame


##############
## Relation ##
##############


def schema_from_document(document, header) -> Schema:
    if not isinstance(document, dict):
        raise ParseError("a schema document maps 'qi' and 'sensitive' to lists of attributes")
    qi = document.get("qi") or []
    sensitive = document.get("sensitive") or []
    unknown = [a for a in (*qi, *sensitive) if a not in header]
    if unknown:
        raise SchemaError(f"unknown attribute {unknown[0]} in schema; the data has {list(header)}")
    return Schema(tuple(header), tuple(qi), tuple(sensitive))


def relation_from_frame(frame, schema_document, allow_suppressed=False) -> Relation:
    """
    Builds a relation from parsed CSV cells. The literal `*` is reserved for
    suppressed cells and only accepted, in QI columns, with `allow_suppressed`.
    """
    header = [str(h) for h in frame.iloc[0].tolist()]
    schema = schema_from_document(schema_document, header)
    body = frame.iloc[1:]
    qi = set(schema.qi_positions)
    rows = []
    for line, values in enumerate(body.itertuples(index=False, name=None), start=2):
        row = []
        for position, cell in enumerate(values):
            if cell == STAR:
                if not allow_suppressed:
                    raise ParseError(f"line {line}: '*' is reserved for suppressed cells")
                if position not in qi:
                    raise ParseError(f"line {line}: '*' in non-QI attribute {header[position]}")
                row.append(SUPPRESSED)
            else:
                row.append(cell)
        rows.append(tuple(row))
    return Relation.from_rows(schema, rows)


def relation_to_frame(r: Relation) -> pd.DataFrame:
    rows = [[STAR if cell is SUPPRESSED else cell for cell in row] for row in r.rows]
    return pd.DataFrame(rows, columns=list(r.schema.attributes), dtype=object)


def write_relation(r: Relation, file_path):
    relation_to_frame(r).to_csv(file_path, index=False, lineterminator="\n")


#################
## Constraints ##
#################


def _as_list(value):
    if isinstance(value, (list, tuple)):
        return [str(v) for v in value]
    return [str(value)]


def constraints_from_document(document) -> ConstraintSet:
    if not isinstance(document, list):
        raise ParseError("a constraint document is a list of {attrs, values, lo, hi} entries")
    constraints = []
    for i, entry in enumerate(document):
        if not isinstance(entry, dict):
            raise ParseError(f"constraint {i}: expected a mapping, got {entry!r}")
        missing = [key for key in ("attrs", "values", "lo") if key not in entry]
        if missing:
            raise ParseError(f"constraint {i}: missing {', '.join(missing)}")
        lo, hi = entry["lo"], entry.get("hi")
        for name, bound in (("lo", lo), ("hi", hi)):
            if bound is not None and (isinstance(bound, bool) or not isinstance(bound, int)):
                raise ParseError(f"constraint {i}: {name} must be an integer, got {bound!r}")
        constraints.append(DiversityConstraint.of(_as_list(entry["attrs"]), _as_list(entry["values"]), lo, hi))
    return ConstraintSet(tuple(constraints))


def constraints_to_document(sigma_set) -> list:
    return [
        {
            "attrs": list(sigma.target.attrs),
            "values": list(sigma.target.values),
            "lo": sigma.lo,
            "hi": None if sigma.hi is UNBOUNDED else sigma.hi,
        }
        for sigma in sigma_set
    ]


def write_json(document, file_path):
    with open(file_path, "w") as outf:
        json.dump(document, outf, indent=2)
        outf.write("\n")
