"""Unit tests for the online clustering and covering lab."""
