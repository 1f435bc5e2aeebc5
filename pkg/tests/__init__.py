"""Test suite for Deep Research Agent."""
