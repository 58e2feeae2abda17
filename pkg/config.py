"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT
"""

import pathlib

from dynaconf import Dynaconf

config = Dynaconf(
    envvar_prefix="QTWIST",
    settings_files=[],
    max_basis_size=256,
    frontier_factor=4,
    default_order="degrevlex",
    verify_terms=30,
    svg_coordinates="jolted",
    newton_include_rhs=False,
)

ORDER_KINDS = [
    "lex",
    "deglex",
    "degrevlex",
]

SVG_COORDINATES = [
    "jolted",
    "raw",
]


class ConfigError(Exception):
    pass


def validate_config(config):
    """Validate config - make sure values are consistent"""

    for setting in [
        "max_basis_size",
        "frontier_factor",
        "verify_terms",
    ]:
        if setting not in config:
            raise ConfigError(f"Config error: Missing parameter `{setting}` in the configuration.")
        value = config[setting]
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise ConfigError(f"Config error: `{setting}` must be a positive integer. Current value is `{value}`.")

    if config.default_order not in ORDER_KINDS:
        raise ConfigError(
            f"Config error: `default_order` parameter must be one of {', '.join(ORDER_KINDS)}. "
            f"Current value is `{config.default_order}`."
        )

    if config.svg_coordinates not in SVG_COORDINATES:
        raise ConfigError(
            f"Config error: `svg_coordinates` parameter must be either `jolted` or `raw`. "
            f"Current value is `{config.svg_coordinates}`."
        )

    if not isinstance(config.newton_include_rhs, bool):
        raise ConfigError("Config error: `newton_include_rhs` must be set to either `true` or `false`.")


def update_config_path(
    path_param: str,
) -> None:
    config_file_path = pathlib.Path(path_param)

    if config_file_path.exists():
        user_file_config = Dynaconf(
            envvar_prefix=False,
            settings_files=[config_file_path],
        )
        config.update(user_file_config)
    else:
        raise IOError(f"Config file {config_file_path} does not exist.")
