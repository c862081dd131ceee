"""Pipeline modules: one entry point per command, each returning a response dict."""
