"""JSON schemas for every input format (version 1)."""

from __future__ import annotations

SCALAR = {
    "oneOf": [
        {"type": "integer"},
        {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"},
        {"type": "array", "items": {"type": "string"}, "minItems": 2, "maxItems": 2},
    ]
}

FRACTION = {"oneOf": [{"type": "integer"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}

_MATRIX = {"type": "array", "items": {"type": "array", "items": SCALAR}}

SPEC = {
    "$id": "kintegral/spec/1",
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["quotient", "compact"]}},
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "quotient"}}},
            "then": {
                "required": ["group", "weights"],
                "properties": {
                    "group": {"type": "object"},
                    "weights": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                    "name": {"type": "string"},
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": "compact"}}},
            "then": {
                "required": ["dimension", "sectors", "pairing", "c1"],
                "properties": {
                    "dimension": {"type": "integer", "minimum": 1},
                    "sectors": {
                        "type": "array",
                        "minItems": 1,
                        "items": {
                            "type": "object",
                            "required": ["label", "classes"],
                            "properties": {
                                "label": {"type": "string"},
                                "age": FRACTION,
                                "classes": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "required": ["name", "degree"],
                                        "properties": {"name": {"type": "string"},
                                                       "degree": {"type": "integer", "minimum": 0}},
                                    },
                                },
                                "tangent": {
                                    "type": "array",
                                    "items": {
                                        "type": "object",
                                        "required": ["f", "rank", "ch"],
                                        "properties": {"f": FRACTION, "rank": {"type": "integer"},
                                                       "ch": {"type": "array", "items": SCALAR}},
                                    },
                                },
                            },
                        },
                    },
                    "pairing": _MATRIX,
                    "c1": {"type": "array", "items": SCALAR},
                    "cup": {"type": "array", "items": {"type": "array", "minItems": 4, "maxItems": 4}},
                    "inv": {"type": "object", "additionalProperties": {"type": "string"}},
                    "line_bundles": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["name", "xi0"],
                            "properties": {"name": {"type": "string"},
                                           "xi0": {"type": "array", "items": SCALAR},
                                           "f": {"type": "object", "additionalProperties": FRACTION}},
                        },
                    },
                    "nef_basis": {"type": "array", "items": {"type": "array", "items": SCALAR}},
                },
            },
        },
    ],
}

CORRELATORS = {
    "$id": "kintegral/correlators/1",
    "type": "object",
    "required": ["entries"],
    "properties": {
        "nef_basis": {"type": "integer", "minimum": 0},
        "complete_through": {"type": "integer", "minimum": 0},
        "weights": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
        "entries": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["insertions", "value"],
                "properties": {
                    "insertions": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "compact": {"type": "integer", "minimum": 0},
                    "d": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    "value": SCALAR,
                },
            },
        },
    },
}

POTENTIALS = {
    "$id": "kintegral/potentials/1",
    "type": "object",
    "properties": {
        "sectors": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["coeffs"],
                "properties": {"coeffs": {"type": "array", "items": {"type": "array", "prefixItems": [SCALAR, {"type": "integer"}],
                                                                     "minItems": 2, "maxItems": 2}}},
            },
        },
        "F0": {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2}},
        "instantons": {"type": "array", "items": {"type": "object", "required": ["d", "value"]}},
    },
}

FM = {
    "$id": "kintegral/fm/1",
    "type": "object",
    "required": ["curves"],
    "properties": {
        "curves": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["label", "character"],
                "properties": {
                    "label": {"type": "string"},
                    "character": {"type": "object", "additionalProperties": {"type": "integer"}},
                    "dim": {"type": "integer"},
                },
            },
        }
    },
}

TRANSFORM = {
    "$id": "kintegral/transform/1",
    "type": "object",
    "required": ["matrix"],
    "properties": {
        "matrix": {"type": "array", "items": {"type": "array", "items": {
            "type": "array", "items": {"type": "array", "prefixItems": [{"type": "integer"}, SCALAR],
                                       "minItems": 2, "maxItems": 2}}}},
        "z_window": {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2},
    },
}

PAIR = {
    "$id": "kintegral/pair/1",
    "type": "object",
    "required": ["degrees", "omega"],
    "properties": {"degrees": {"type": "array", "items": FRACTION}, "omega": _MATRIX},
}

SCHEMAS = {
    "spec": SPEC,
    "correlators": CORRELATORS,
    "potentials": POTENTIALS,
    "fm": FM,
    "transform": TRANSFORM,
    "pair": PAIR,
}
