"""Configuration module for the WSC Toolkit"""
