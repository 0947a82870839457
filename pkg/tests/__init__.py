"""Tests for mistsim."""
