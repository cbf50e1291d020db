#!/usr/bin/env python3
"""Checks that the published schema is valid and accepts every example."""

import json
import sys

import jsonschema


def main() -> int:
    schema_path, *examples = sys.argv[1:]
    with open(schema_path) as f:
        schema = json.load(f)
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    failed = False
    for path in examples:
        with open(path) as f:
            errors = list(validator.iter_errors(json.load(f)))
        for e in errors:
            print(f"{path}: {'/'.join(map(str, e.path))}: {e.message}")
        failed |= bool(errors)
        print(f"{'FAIL' if errors else 'ok'} {path}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
