"""Oracles shared by the test-suite; they live in the package so that
`layercast verify` can run them too."""
from layercast.reference import *  # noqa: F401,F403
