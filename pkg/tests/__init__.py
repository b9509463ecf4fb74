"""Tests for the Helmholtz sweeping preconditioner."""
