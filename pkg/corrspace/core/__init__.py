"""Linear algebra, resource states, measurement bases and error channels."""
