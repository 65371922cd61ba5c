"""Tests for audvault."""
