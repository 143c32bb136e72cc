# resampling: weights, samples, seeds and the bootstrapped t-statistics
