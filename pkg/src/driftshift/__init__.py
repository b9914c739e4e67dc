"""Classification under drifting label probabilities.

Modules
-------
core        rates, metric spaces, samples, seeded generators
confbands   local confidence bands for ball masses and for ``eta``
densratio   adaptive-radius estimate of the transformed density ratio
legendre    shifted Legendre basis and extrapolation weights
labelprob   windowed extrapolation of the stream marginal and the prior estimate
classifier  plug-in classifier and the sequential policy
sim         scenarios, exact oracles, regret, bound overlays
experiment  replication harness used by the CLI and the acceptance suite
cli         command-line runner
"""

__version__ = "0.1.0"
