"""
Wrench grammar: relative-change encoding of 6-axis force/torque signals.

Turns wrist wrench recordings of an assembly task into a layered action
grammar (primitives, motion compositions, low-level behaviours) and
classifies which task phase a grammar belongs to with an SVM or an online
Mondrian forest.
"""

__version__ = "1.0.0"
