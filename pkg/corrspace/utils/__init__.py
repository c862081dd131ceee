"""Shared configuration, logging setup, errors and serialization helpers."""
