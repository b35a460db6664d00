"""Test module of unanie_launcher"""
