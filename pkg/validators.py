"""
Validators Module
Validation of run settings and package contents
"""

from typing import List, Optional, Tuple

from field_arith import SUPPORTED_D

COMMANDS = ("theta", "discs", "twists", "stats", "verify", "resume")


class RunConfigValidator:
    """Validate command-line settings"""

    @staticmethod
    def validate_command(command: str) -> Tuple[bool, Optional[str]]:
        if command not in COMMANDS:
            return False, f"Unknown command {command!r}. Allowed: {', '.join(COMMANDS)}"
        return True, None

    @staticmethod
    def validate_bound(bound: Optional[int], name: str = "--bound") -> Tuple[bool, Optional[str]]:
        if bound is None:
            return False, f"{name} is required"
        if not isinstance(bound, int):
            return False, f"{name} must be an integer"
        if bound < 1:
            return False, f"{name} must be at least 1"
        return True, None

    @staticmethod
    def validate_workers(workers: int) -> Tuple[bool, Optional[str]]:
        if not isinstance(workers, int) or workers < 1:
            return False, "worker count must be a positive integer"
        return True, None

    @staticmethod
    def validate_field(d: int) -> Tuple[bool, Optional[str]]:
        if d not in SUPPORTED_D:
            return False, f"Q(sqrt {d}) is not supported. Allowed d: {', '.join(map(str, SUPPORTED_D))}"
        return True, None

    @staticmethod
    def parse_grid(text: str) -> Tuple[Optional[List[int]], Optional[str]]:
        """Parse "1e2,1e3,..." into increasing integers"""
        try:
            values = [int(float(part)) for part in text.split(',') if part.strip()]
        except ValueError:
            return None, f"grid {text!r} must be a comma-separated list of numbers"
        if not values:
            return None, "grid is empty"
        if any(v < 1 for v in values):
            return None, "grid values must be at least 1"
        if values != sorted(set(values)):
            return None, "grid values must be strictly increasing"
        return values, None


class PackageValidator:
    """Validate package data before it is used by a pipeline"""

    @staticmethod
    def validate_usable(pkg, command: str) -> Tuple[bool, Optional[str]]:
        if pkg.status == "template" and command != "verify":
            return False, f"package {pkg.label} is a template; only verify accepts it"
        if pkg.H == 0:
            return False, f"package {pkg.label} has no lattices"
        return True, None

    @staticmethod
    def validate_weight(weight: int) -> Tuple[bool, Optional[str]]:
        if weight < 2 or weight % 2:
            return False, "parallel weight must be an even integer >= 2"
        return True, None
