"""Offline open science monitoring: corpus building, enrichment and KPI reporting."""

__version__ = "0.1.0"
