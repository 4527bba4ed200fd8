"""Tests for logcorr-lab."""
