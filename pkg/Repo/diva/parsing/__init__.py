import os
import inspect
from diva.errors import ParseError
from diva.parsing.loaders import generate_loader
from diva.parsing.parsers import (
    constraints_from_document,
    parse_csv,
    parse_json,
    parse_yaml,
    relation_from_frame,
)

default_parsers = {
    ".yml": parse_yaml,
    ".yaml": parse_yaml,
    ".json": parse_json,
    ".csv": parse_csv,
}


def parse(file_path, parse_dict=default_parsers, loader=None):
    """
    Reads a file with the parser registered for its extension.
    """

    if loader is None:
        loader = generate_loader()

    if not os.path.exists(file_path):
        raise ParseError(f"no such file: {file_path}")

    path, extension = os.path.splitext(file_path)

    parser = parse_dict.get(extension.lower())
    if parser is None:
        raise ParseError(f"{file_path}: unsupported file type {extension or '(none)'}")

    if "loader" in inspect.signature(parser).parameters.keys():
        return parser(file_path, loader=loader)
    return parser(file_path)


def read_relation(csv_path, schema_path, allow_suppressed=False, parse_dict=default_parsers):
    return relation_from_frame(
        parse(csv_path, parse_dict), parse(schema_path, parse_dict), allow_suppressed=allow_suppressed
    )


def read_constraints(file_path, parse_dict=default_parsers, loader=None):
    return constraints_from_document(parse(file_path, parse_dict, loader=loader))
