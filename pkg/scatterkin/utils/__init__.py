from .application import dict_to_object, object_to_dict, get_enum_by_name, config_hash
from .console_text import ForeColor, TextMode, STYLE, get_formatted, get_formatted_predefined, \
    get_formatted_from_dict, get_formatted_verdict
