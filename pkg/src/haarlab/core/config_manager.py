"""
Configuration management for haarlab.

This module loads, validates and manages lab configuration files with support
for multiple profiles and profile inheritance. A missing configuration file is
not an error: every setting has a default.
"""

import logging
import os
from typing import Any, Dict, List, Optional

import yaml

from .exceptions import ConfigurationError, ValidationError
from .models import LabConfig, ProfileConfig

SEARCH_PATHS = [
    # Current directory
    "./haarlab.yaml",
    "./haarlab.yml",
    "./.haarlab.yaml",
    # User home directory
    "~/.haarlab/config.yaml",
    "~/.haarlab.yaml",
]


class ConfigManager:
    """Manages configuration loading, validation, and profile handling."""

    def __init__(self, config_path: Optional[str] = None):
        """Initialize configuration manager.

        Args:
            config_path: Path to configuration file. If None, auto-detect.
        """
        self.logger = logging.getLogger(__name__)
        self.config_path = self._resolve_config_path(config_path)
        self.config: Optional[LabConfig] = None
        self.profiles: Dict[str, ProfileConfig] = {}
        self.active_profile: Optional[str] = None

        if self.config_path and os.path.exists(self.config_path):
            self.load_config()
        elif config_path:
            raise ConfigurationError(
                f"Configuration file not found: {self.config_path}",
                config_path=self.config_path,
            )

    def _resolve_config_path(self, config_path: Optional[str]) -> Optional[str]:
        """Resolve configuration file path with auto-detection."""
        if config_path:
            return os.path.expanduser(config_path)

        for path in SEARCH_PATHS:
            expanded_path = os.path.expanduser(path)
            if os.path.exists(expanded_path):
                self.logger.debug(f"Found configuration file: {expanded_path}")
                return expanded_path

        return None

    def load_config(self, config_path: Optional[str] = None) -> LabConfig:
        """Load configuration from file.

        Args:
            config_path: Path to configuration file

        Returns:
            Loaded and validated configuration

        Raises:
            ConfigurationError: If the file is missing, not YAML, or invalid
        """
        if config_path:
            self.config_path = os.path.expanduser(config_path)

        if not self.config_path or not os.path.exists(self.config_path):
            raise ConfigurationError(
                f"Configuration file not found: {self.config_path}",
                config_path=self.config_path,
            )

        try:
            with open(self.config_path, "r") as f:
                raw_config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigurationError(
                f"Invalid YAML in configuration file: {e}", config_path=self.config_path
            )
        except OSError as e:
            raise ConfigurationError(
                f"Failed to read configuration file: {e}", config_path=self.config_path
            )

        raw_config = raw_config or {}
        if not isinstance(raw_config, dict):
            raise ConfigurationError(
                "Configuration file must hold a mapping", config_path=self.config_path
            )

        if "profiles" in raw_config:
            self._load_profiles(raw_config["profiles"] or {})

            active_profile = raw_config.get("active_profile", "default")
            if active_profile not in self.profiles:
                raise ConfigurationError(
                    f"Active profile '{active_profile}' not found in profiles",
                    config_path=self.config_path,
                )
            self.active_profile = active_profile
            self.config = self.profiles[active_profile].lab_config
        else:
            self.config = self._validate(raw_config)

        self.logger.info(f"Loaded configuration from {self.config_path}")
        return self.config

    def _validate(self, config_data: Dict[str, Any]) -> LabConfig:
        try:
            return LabConfig(**config_data)
        except Exception as e:
            raise ConfigurationError(
                f"Configuration validation failed: {e}",
                config_path=self.config_path,
                validation_errors=[str(e)],
            )

    def _load_profiles(self, profiles_data: Dict[str, Any]):
        """Load profiles, resolving inherits_from chains in any order."""
        self.profiles = {}
        resolving: List[str] = []

        def resolve(name: str) -> ProfileConfig:
            if name in self.profiles:
                return self.profiles[name]
            if name not in profiles_data:
                raise ConfigurationError(
                    f"Profile '{name}' not found", config_path=self.config_path
                )
            if name in resolving:
                raise ConfigurationError(
                    f"Profile inheritance cycle: {' -> '.join(resolving + [name])}",
                    config_path=self.config_path,
                )
            resolving.append(name)
            profile_data = dict(profiles_data[name] or {})
            lab_data = profile_data.get("lab_config", {}) or {}
            parent_name = profile_data.get("inherits_from")
            if parent_name:
                parent = resolve(parent_name)
                lab_data = self._merge_configs(parent.lab_config.model_dump(), lab_data)
            profile_data["lab_config"] = lab_data
            try:
                profile = ProfileConfig(name=name, **profile_data)
            except Exception as e:
                raise ConfigurationError(
                    f"Failed to load profile '{name}': {e}",
                    config_path=self.config_path,
                    validation_errors=[str(e)],
                )
            resolving.pop()
            self.profiles[name] = profile
            return profile

        for profile_name in profiles_data:
            resolve(profile_name)

    def _merge_configs(
        self, base_config: Dict[str, Any], override_config: Dict[str, Any]
    ) -> Dict[str, Any]:
        """Recursively merge configuration dictionaries."""
        merged = base_config.copy()

        for key, value in override_config.items():
            if (
                key in merged
                and isinstance(merged[key], dict)
                and isinstance(value, dict)
            ):
                merged[key] = self._merge_configs(merged[key], value)
            else:
                merged[key] = value

        return merged

    def get_config(self, profile: Optional[str] = None) -> LabConfig:
        """Get configuration for specified profile.

        Args:
            profile: Profile name. If None, use active profile or main config.

        Returns:
            Configuration object; defaults when no file was found

        Raises:
            ConfigurationError: If the profile is not defined
        """
        if profile:
            if profile not in self.profiles:
                raise ConfigurationError(
                    f"Profile '{profile}' not found", config_path=self.config_path
                )
            return self.profiles[profile].lab_config

        if self.config is None:
            self.logger.debug("No configuration file found, using defaults")
            self.config = LabConfig()

        return self.config

    def list_profiles(self) -> List[str]:
        """List available configuration profiles."""
        return list(self.profiles.keys())

    def get_active_profile(self) -> Optional[str]:
        """Get the name of the active profile."""
        return self.active_profile

    def validate_config(self, config_path: Optional[str] = None) -> List[str]:
        """Validate configuration file and return list of issues.

        Args:
            config_path: Path to configuration file

        Returns:
            List of validation error messages (empty if valid)
        """
        issues = []

        try:
            if config_path:
                temp_manager = ConfigManager(config_path)
            else:
                temp_manager = self

            temp_manager.load_config()

        except ConfigurationError as e:
            issues.extend(e.validation_errors or [e.message])
        except Exception as e:
            issues.append(f"Unexpected error: {e}")

        return issues

    def create_default_config(
        self, output_path: str, template_type: str = "basic"
    ) -> str:
        """Create a default configuration file.

        Args:
            output_path: Path where to create the configuration file
            template_type: Type of template (basic, ci, thorough)

        Returns:
            Path to created configuration file
        """
        templates = {
            "basic": self._get_basic_template(),
            "ci": self._get_ci_template(),
            "thorough": self._get_thorough_template(),
        }

        if template_type not in templates:
            raise ValidationError(
                f"Unknown template type: {template_type}",
                field_name="template_type",
                expected_type="one of: " + ", ".join(templates.keys()),
            )

        output_path = os.path.expanduser(output_path)
        output_dir = os.path.dirname(output_path)
        if output_dir:
            os.makedirs(output_dir, exist_ok=True)

        with open(output_path, "w") as f:
            yaml.safe_dump(templates[template_type], f, default_flow_style=False, indent=2)

        self.logger.info(
            f"Created {template_type} configuration template: {output_path}"
        )
        return output_path

    def _get_basic_template(self) -> Dict[str, Any]:
        """Every section with its default values."""
        return LabConfig().model_dump(mode="json")

    def _get_ci_template(self) -> Dict[str, Any]:
        """Reduced sampling for quick runs."""
        basic = self._get_basic_template()
        basic["sampling"].update(
            {
                "theta_samples": 9,
                "alpha_scan_steps": 8,
                "phase_resolution": 16,
                "power_iterations": 50,
            }
        )
        basic["logging"]["console_level"] = "WARNING"
        return basic

    def _get_thorough_template(self) -> Dict[str, Any]:
        """Profiles with inheritance: a default profile and a thorough one."""
        return {
            "active_profile": "default",
            "profiles": {
                "default": {
                    "description": "Default tolerances and sampling",
                    "lab_config": {},
                },
                "thorough": {
                    "description": "Finer sampling and a process pool",
                    "inherits_from": "default",
                    "lab_config": {
                        "sampling": {
                            "theta_samples": 65,
                            "alpha_scan_steps": 64,
                            "phase_resolution": 128,
                            "power_iterations": 2000,
                        },
                        "runtime": {"workers": 4},
                    },
                },
                "quick": {
                    "description": "Reduced sampling for smoke runs",
                    "inherits_from": "default",
                    "lab_config": {
                        "sampling": {"theta_samples": 9, "phase_resolution": 16}
                    },
                },
            },
        }
