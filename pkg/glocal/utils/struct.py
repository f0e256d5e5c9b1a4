import logging
import types
import typing
from dataclasses import fields, MISSING
from enum import Enum

import numpy as np
import orjson


def _strip_optional(typ):
    if isinstance(typ, types.UnionType) or typing.get_origin(typ) is typing.Union:
        args = [a for a in typing.get_args(typ) if a is not type(None)]
        if len(args) == 1:
            return args[0]
    return typ


def parse_field(value, typ):
    if value is None or value is MISSING:
        return None
    typ = _strip_optional(typ)
    if isinstance(typ, type) and issubclass(typ, Enum):
        return typ(value)
    if typ is bool:
        # CSV cells come back as strings
        if isinstance(value, str):
            return value.strip().lower() in ("true", "1", "yes")
        return bool(value)
    if typ in (float, np.float64):
        return float(value)
    if typ in (int, np.int64):
        return int(value)
    if typ is np.ndarray:
        return np.asarray(value, dtype=float)
    if typing.get_origin(typ) is list:
        (item_typ,) = typing.get_args(typ) or (None,)
        return [parse_field(v, item_typ) if item_typ else v for v in value]
    return value  # fallback


class DefaultStruct:
    def to_json(self, default=str, option=orjson.OPT_SERIALIZE_NUMPY) -> bytes:
        return orjson.dumps(self, option=option | orjson.OPT_SERIALIZE_NUMPY, default=default)

    def to_dict(self) -> dict:
        return orjson.loads(self.to_json())

    @classmethod
    def from_dict(cls, raw: dict):
        parsed = {}
        try:
            for f in fields(cls):
                if not f.init:
                    continue
                value = raw.get(f.name, MISSING)
                if value is MISSING and f.default is not MISSING:
                    continue
                parsed[f.name] = parse_field(value, f.type)
        except Exception:
            logging.exception(f"Error parsing {raw}. Result default None")
            return None
        return cls(**parsed)

    def __eq__(self, other):
        if not isinstance(other, DefaultStruct):
            return False
        return self.to_json(option=orjson.OPT_SORT_KEYS) == other.to_json(option=orjson.OPT_SORT_KEYS)
