"""JSON schema for every report printed by the command-line tool."""

NUMBER = {"oneOf": [{"type": "number"}, {"enum": ["inf", "-inf", "nan"]}]}

BOUND_REPORT = {
    "type": "object",
    "required": ["name", "lhs", "rhs", "direction", "strict", "holds", "guard_met", "anchor", "inputs"],
    "properties": {
        "name": {"type": "string"},
        "lhs": NUMBER,
        "rhs": NUMBER,
        "direction": {"enum": ["<=", ">=", "<", ">"]},
        "strict": {"type": "boolean"},
        "holds": {"type": "boolean"},
        "guard_met": {"type": "boolean"},
        "anchor": {"type": "string"},
        "inputs": {"type": "object"},
    },
    "additionalProperties": False,
}

_REPORTS = {"type": "array", "items": {"$ref": "#/$defs/report"}}
_POINT = {"type": "array", "items": NUMBER, "minItems": 2, "maxItems": 2}

PAYLOADS = {
    "delta": {
        "required": ["space", "value", "label", "quadruples"],
        "properties": {"value": NUMBER, "quadruples": {"type": "integer", "minimum": 0}},
    },
    "growth": {
        "required": ["group", "points", "slope_estimate"],
        "properties": {
            "points": {"type": "array", "items": {"type": "array", "prefixItems": [NUMBER, {"type": "integer"}]}},
            "slope_estimate": NUMBER,
        },
    },
    "classify": {
        "required": ["class", "fixed", "length"],
        "properties": {
            "class": {"enum": ["Elliptic", "Parabolic", "Hyperbolic", "Identity"]},
            "fixed": {"type": "array", "items": NUMBER},
            "length": NUMBER,
        },
    },
    "length": {
        "required": ["lo", "hi", "width", "n_used", "delta"],
        "properties": {"lo": NUMBER, "hi": NUMBER, "width": NUMBER, "n_used": {"type": "integer"}},
    },
    "margulis": {
        "required": ["collar_radius", "R", "reports"],
        "properties": {"collar_radius": NUMBER, "reports": _REPORTS},
    },
    "pingpong": {"required": ["mode"], "properties": {"mode": {"enum": ["schottky", "demi", "dispatch"]}}},
    "oracle": {
        "required": ["relation", "max_len", "mode"],
        "properties": {
            "relation": {"oneOf": [{"type": "null"}, {"type": "array", "items": {"type": "string"}}]},
            "mode": {"enum": ["group", "semigroup"]},
        },
    },
    "bounds": {
        "required": ["name"],
        "properties": {"reports": _REPORTS, "values": {"type": "object"}},
    },
    "verify": {
        "required": ["criteria", "passed", "failed"],
        "properties": {
            "criteria": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["id", "title", "passed", "details"],
                    "properties": {
                        "id": {"type": "integer"},
                        "passed": {"type": "boolean"},
                        "details": {"type": "object", "properties": {"reports": _REPORTS}},
                    },
                },
            },
            "passed": {"type": "integer"},
            "failed": {"type": "integer"},
        },
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "gromolab report",
    "type": "object",
    "required": ["command", "config", "status", "payload"],
    "properties": {
        "command": {"enum": sorted(PAYLOADS)},
        "config": {"type": "object", "required": ["seed"]},
        "status": {"enum": ["ok", "failed", "relation_found", "error"]},
        "payload": {"type": "object"},
        "error": {"type": "string"},
    },
    "allOf": [
        {
            "if": {"properties": {"command": {"const": cmd}, "status": {"not": {"const": "error"}}}},
            "then": {"properties": {"payload": dict(type="object", **spec)}},
        }
        for cmd, spec in PAYLOADS.items()
    ],
    "$defs": {"report": BOUND_REPORT, "point": _POINT},
}
