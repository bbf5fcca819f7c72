"""Python access to the cgolab experiments and transform utilities."""

from ._cgolab import (
    cap_depth,
    config_hash,
    default_config,
    hemisphere_directions,
    phantom_value,
    plane_integral,
    read_field_dump,
    run,
    validate_config,
)

__all__ = [
    "cap_depth",
    "config_hash",
    "default_config",
    "hemisphere_directions",
    "phantom_value",
    "plane_integral",
    "read_field_dump",
    "run",
    "validate_config",
]
