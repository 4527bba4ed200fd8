"""Validation of experiment configs against their parameter schemas."""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

from .config import ExperimentConfig
from .parameter_schemas import ExperimentSchema, get_schema

logger = logging.getLogger(__name__)


@dataclass
class ValidationResult:
    """Result of config validation; `parameters` holds coerced values with defaults filled in."""
    valid: bool
    errors: List[str] = field(default_factory=list)
    parameters: Dict[str, Any] = field(default_factory=dict)

    @property
    def reason(self) -> str:
        return "; ".join(self.errors) if self.errors else "ok"


class ParameterValidator:
    """Checks required keys, rejects unknown keys and enforces documented ranges."""

    def validate(self, config: ExperimentConfig) -> ValidationResult:
        return self.validate_parameters(get_schema(config.experiment), config.parameters)

    def validate_parameters(self, schema: ExperimentSchema, parameters: Dict[str, Any]) -> ValidationResult:
        errors: List[str] = []
        resolved: Dict[str, Any] = {}

        for key in sorted(parameters):
            if schema.parameter(key) is None:
                errors.append(f"parameters.{key}: unknown parameter for {schema.kind.value}")

        for spec in schema.parameters:
            if spec.name not in parameters or parameters[spec.name] is None:
                if spec.required:
                    errors.append(f"parameters.{spec.name}: required")
                else:
                    resolved[spec.name] = spec.default
                continue
            try:
                resolved[spec.name] = spec.coerce(parameters[spec.name])
            except ValueError as e:
                errors.append(f"parameters.{spec.name}: {e}")

        if errors:
            logger.debug(f"Validation of {schema.kind.value} failed: {errors}")
            return ValidationResult(False, errors)
        return ValidationResult(True, [], resolved)


# Global validator instance
validator = ParameterValidator()


def get_validator() -> ParameterValidator:
    """Get the global parameter validator instance."""
    return validator
