"""Tests of the sourir package."""
