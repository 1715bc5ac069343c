"""
Utility functions for loading and saving run data: configs, CSV tables and JSONL streams.
"""
import json
import os
import tempfile
import typing
from dataclasses import fields, replace

import pandas as pd
from dotenv import dotenv_values

from src.config import CONFIG_SECTIONS, LabConfig, config_keys
from src.errors import ConfigError
from src.utils.validators import config_problems


def load_csv(file_path, **kwargs):
    """
    Load data from a CSV file.

    Args:
        file_path (str): Path to the CSV file.
        **kwargs: Additional arguments to pass to pandas.read_csv.

    Returns:
        pandas.DataFrame: The loaded data.

    Raises:
        FileNotFoundError: If the file does not exist.
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")

    return pd.read_csv(file_path, **kwargs)


def save_csv(data, file_path, **kwargs):
    """
    Save data to a CSV file.

    Args:
        data (pandas.DataFrame): The data to save.
        file_path (str): Path to the CSV file.
        **kwargs: Additional arguments to pass to pandas.to_csv.

    Returns:
        str: The path to the saved file.
    """
    # Create directory if it doesn't exist
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)

    # Save the data with index=False by default
    if 'index' not in kwargs:
        kwargs['index'] = False
    data.to_csv(file_path, **kwargs)

    return file_path


def write_jsonl(records, file_path, mode='w'):
    """
    Write an iterable of dicts as one JSON object per line.

    Returns:
        str: The path to the written file.
    """
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, mode, encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record) + '\n')
    return file_path


def read_jsonl(file_path):
    """
    Read a JSONL file into a list of dicts.

    Raises:
        FileNotFoundError: If the file does not exist.
    """
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"File not found: {file_path}")
    with open(file_path, 'r', encoding='utf-8') as f:
        return [json.loads(line) for line in f if line.strip()]


def atomic_write_bytes(data, file_path):
    """
    Write bytes to a temporary file next to ``file_path`` and rename it into place.

    Returns:
        str: The path to the written file.
    """
    directory = os.path.dirname(os.path.abspath(file_path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-')
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(data)
        os.replace(tmp_path, file_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    return file_path


def _coerce(key, raw, field_type):
    text = raw.strip()
    try:
        if field_type is bool:
            lowered = text.lower()
            if lowered not in ('true', 'false'):
                raise ValueError(text)
            return lowered == 'true'
        if field_type is int:
            return int(text)
        if field_type is float:
            return float(text)
        if typing.get_origin(field_type) is tuple:
            item_type = typing.get_args(field_type)[0]
            inner = text[1:-1] if text.startswith('[') and text.endswith(']') else text
            return tuple(item_type(part.strip()) for part in inner.split(',') if part.strip())
        if field_type is str:
            return text.strip('"\'')
    except ValueError:
        raise ConfigError(f"Config key '{key}': cannot read {raw!r} as {field_type}") from None
    raise ConfigError(f"Config key '{key}': unsupported field type {field_type}")


def parse_config(values, base=None):
    """
    Build a LabConfig from flat key -> string overrides.

    Args:
        values (dict): Flat overrides, e.g. from ``dotenv_values``.
        base (LabConfig, optional): Config to override (default: all defaults).

    Returns:
        LabConfig: The validated config.

    Raises:
        ConfigError: On unknown keys, unreadable values or violated invariants.
    """
    base = base or LabConfig()
    owners = config_keys()
    unknown = sorted(k for k in values if k not in owners)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")

    overrides = {section: {} for section in CONFIG_SECTIONS}
    for key, raw in values.items():
        if raw is None:
            raise ConfigError(f"Config key '{key}' has no value")
        section = owners[key]
        field_type = {f.name: f.type for f in fields(CONFIG_SECTIONS[section])}[key]
        overrides[section][key] = _coerce(key, raw, field_type)

    config = LabConfig(**{
        section: replace(getattr(base, section), **overrides[section])
        for section in CONFIG_SECTIONS
    })
    problems = config_problems(config)
    if problems:
        raise ConfigError('; '.join(problems))
    return config


def load_config(file_path):
    """
    Load a flat ``key = value`` config file.

    Args:
        file_path (str): Path to the config file.

    Returns:
        LabConfig: Defaults overridden by the file.

    Raises:
        ConfigError: If the file is missing, has unknown keys, or fails validation.
    """
    if not os.path.exists(file_path):
        raise ConfigError(f"Config file not found: {file_path}")
    return parse_config(dotenv_values(file_path, interpolate=False))


def format_config(config):
    """
    Render a LabConfig as flat ``key = value`` text that ``load_config`` reads back.

    Returns:
        str: One line per key, grouped by section with comment headers.
    """
    lines = []
    for section in CONFIG_SECTIONS:
        lines.append(f"# [{section}]")
        values = getattr(config, section)
        for f in fields(values):
            value = getattr(values, f.name)
            if isinstance(value, bool):
                text = 'true' if value else 'false'
            elif isinstance(value, tuple):
                text = '[' + ', '.join(repr(v) for v in value) + ']'
            else:
                text = repr(value)
            lines.append(f"{f.name} = {text}")
    return '\n'.join(lines) + '\n'
