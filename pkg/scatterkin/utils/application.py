import hashlib
import json
from types import SimpleNamespace

import orjson

from .._typing import ConfigError


def dict_to_object(dict_entity):
    """
    convert nested dict to nested SimpleNamespace
    """
    return json.loads(json.dumps(dict_entity), object_hook=lambda d: SimpleNamespace(**d))


def object_to_dict(obj):
    if isinstance(obj, SimpleNamespace):
        return {k: object_to_dict(v) for k, v in vars(obj).items()}
    if isinstance(obj, list):
        return [object_to_dict(v) for v in obj]
    return obj


def get_enum_by_name(me, name):
    """
    get enum member by case insensitive name
    :param me: enum
    :param name: key
    :return: member
    """
    for e in me:
        if e.name.lower() == str(name).lower():
            return e
    raise ConfigError(f"cannot found {name} in {me.__name__}, allow value is " + str([x.name for x in me]))


def config_hash(config) -> str:
    """
    sha256 of the sorted key json dump of a raw config
    """
    return hashlib.sha256(orjson.dumps(object_to_dict(config), option=orjson.OPT_SORT_KEYS)).hexdigest()
