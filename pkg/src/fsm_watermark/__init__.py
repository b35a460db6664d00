# -*- coding: utf-8 -*-

"""
This package embeds behavioral watermarks in finite state machines, conceals them by matrix
encryption or cascade decomposition, exposes them through a simulated scan chain and verifies
or attacks them.
"""
import os

__author__ = "fsm-watermark developers"
__contact__ = "fsm-watermark developers, through the project issue tracker"
__copyright__ = "Copyright 2024, fsm-watermark developers"
__status__ = "Prototype"

with open(os.path.join(os.path.dirname(__file__), "VERSION"), encoding='utf-8') as file:
    __version__ = file.read().strip()
