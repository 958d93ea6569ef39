"""Metric timing tools"""
