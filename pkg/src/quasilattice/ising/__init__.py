"""Z-invariant Ising model: couplings, finite-lattice oracles and the correlation engine."""
