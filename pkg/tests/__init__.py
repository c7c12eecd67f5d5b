"""Test suite for sfdtm."""
