"""Tests for b92-keyrate."""
