"""Integration tests for Deep Research Agent."""
