"""Config loading on top of init_helpers.

INI sections map onto the nested dataclasses of a config type through ``init_helpers.Arg.ini_file_to_dataclass``.
This layer only merges ``section.key=value`` overrides into the file and rejects keys no section declares.
"""
import configparser
import dataclasses
import logging
import tempfile
import typing
from pathlib import Path
from typing import TypeVar

import init_helpers

from utils.exceptions import ConfigError

logger = logging.getLogger(__name__)

ConfigT = TypeVar("ConfigT")

SECTION_DEFAULTS = {"logging": {"level": "INFO"}}


def list_config_keys(config_type: type) -> list[str]:
    """List every dotted key accepted by a sectioned config dataclass."""
    keys = []
    for section in dataclasses.fields(config_type):
        section_type = typing.get_type_hints(config_type)[section.name]
        for field in dataclasses.fields(section_type):
            keys.append(f"{section.name}.{field.name}")
    return keys


def parse_override(text: str) -> tuple[str, str]:
    """Split a ``section.key=value`` override."""
    key, separator, value = text.partition("=")
    if not separator or "." not in key:
        raise ConfigError(f"Override must look like section.key=value, got {text!r}")
    return key.strip(), value.strip()


def _read_ini(config_path: str | Path | None) -> configparser.ConfigParser:
    """Parse the config file, or return an empty parser without one."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if config_path is None:
        return parser
    try:
        with open(config_path, encoding="utf-8") as file:
            parser.read_file(file)
    except OSError as e:
        raise ConfigError(f"Cannot read config file {config_path}: {repr(e)}") from e
    except configparser.Error as e:
        raise ConfigError(f"Malformed config file {config_path}: {e}") from e
    return parser


def merge_overrides(
        config_type: type,
        config_path: str | Path | None = None,
        overrides: list[str] | None = None,
) -> configparser.ConfigParser:
    """File values plus overrides (last wins), with one section per config field."""
    parser = _read_ini(config_path)
    for override in overrides or []:
        key, value = parse_override(override)
        section, _, option = key.partition(".")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, option, value)

    _reject_unknown_keys(config_type, parser)

    for section_field in dataclasses.fields(config_type):
        if not parser.has_section(section_field.name):
            parser.add_section(section_field.name)
        for option, value in SECTION_DEFAULTS.get(section_field.name, {}).items():
            if not parser.has_option(section_field.name, option):
                parser.set(section_field.name, option, value)
    return parser


def load_config(
        config_type: type[ConfigT],
        config_path: str | Path | None = None,
        overrides: list[str] | None = None,
) -> ConfigT:
    """Build a sectioned config dataclass from an INI file and dotted overrides."""
    parser = merge_overrides(config_type, config_path, overrides)
    to_dataclass = init_helpers.Arg.ini_file_to_dataclass(config_type)
    with tempfile.TemporaryDirectory() as directory:
        merged_path = Path(directory) / "config.ini"
        with open(merged_path, "w", encoding="utf-8") as file:
            parser.write(file)
        try:
            return to_dataclass(str(merged_path))
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as e:
            raise ConfigError(f"Invalid config: {repr(e)}") from e


def _reject_unknown_keys(config_type: type, parser: configparser.ConfigParser) -> None:
    """Raise ConfigError naming every valid key if the parser holds anything unknown."""
    valid_keys = list_config_keys(config_type)
    valid_key_set = set(valid_keys)
    unknown = sorted(
        f"{section}.{option}"
        for section in parser.sections()
        for option in parser.options(section)
        if f"{section}.{option}" not in valid_key_set
    )
    if unknown:
        raise ConfigError(f"Unknown config keys {unknown}; valid keys are: {', '.join(valid_keys)}")
