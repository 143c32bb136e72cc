# studies: Monte Carlo diagnostics, conditional laws and coverage experiments
