"""Unit tests for Deep Research Agent."""
