"""Branch enumeration, trajectories, counting and the dense oracle."""
