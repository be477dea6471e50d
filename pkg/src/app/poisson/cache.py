"""Cache of u-independent doping potentials.

This module provides the PotentialCache class, which holds the potentials
S1, S2, S3 of a doping profile per (grid, profile) pair. They do not depend
on the state u and are reused at every functional evaluation and time step.

Classes:
    PotentialCache: Central store of DopingPotentials keyed by (grid, profile).

Example:
    >>> cache = PotentialCache(build_potentials)
    >>> pots = cache.add(grid, rho)
    >>> same = cache.add(grid, rho)
    >>> assert pots is same
"""

import logging
from threading import Lock
from typing import Callable

from app.field import Grid
from app.profiles import DopingProfile

from .models import DopingPotentials

logger = logging.getLogger(__name__)


class PotentialCache:
    """Store of DopingPotentials keyed by (grid, profile).

    Initialization is single-writer: concurrent ``add`` calls for the same
    key compute once and share the result read-only.

    Attributes:
        builder: Callable computing DopingPotentials for a (grid, profile).
        entries: Dictionary mapping (grid, profile) tuples to DopingPotentials.
    """

    def __init__(self, builder: Callable[[Grid, DopingProfile], DopingPotentials]):
        """Initialize the cache.

        Args:
            builder: Function computing the potentials on a cache miss.
        """
        self.builder = builder
        self.entries: dict[tuple[Grid, DopingProfile], DopingPotentials] = {}
        self._lock = Lock()

    def add(self, grid: Grid, rho: DopingProfile) -> DopingPotentials:
        """Return the potentials for (grid, rho), computing them on first use.

        Args:
            grid: Grid the potentials are sampled on.
            rho: The doping profile.

        Returns:
            The DopingPotentials instance (either newly built or existing).
        """
        key = (grid, rho)
        with self._lock:
            if key not in self.entries:
                logger.info(f"Computing doping potentials for {rho.kind} on n={grid.n}")
                self.entries[key] = self.builder(grid, rho)
            return self.entries[key]

    def get(self, grid: Grid, rho: DopingProfile) -> DopingPotentials:
        """Get cached potentials.

        Raises:
            KeyError: If (grid, rho) was never added.
        """
        key = (grid, rho)
        if key not in self.entries:
            raise KeyError(f"Potentials not cached: {rho.kind} on n={grid.n}")
        return self.entries[key]

    def remove(self, grid: Grid, rho: DopingProfile) -> None:
        with self._lock:
            self.entries.pop((grid, rho), None)

    def clear(self) -> None:
        """Drop every cached entry."""
        with self._lock:
            self.entries.clear()
