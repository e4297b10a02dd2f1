"""Hybrid soft actor-critic for discrete, continuous and parameterized actions.

Sub-packages: ``numgrad`` (autodiff, Adam, checkpoints), ``policykit``
(squashed Gaussian, radial flow and categorical heads), ``agent``, ``envs``
and ``divlab`` (divergence matching against a mixture target).
"""
