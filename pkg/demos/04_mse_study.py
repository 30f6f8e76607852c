"""A small Monte Carlo study: Whittle MSE against window length at two bin widths."""
from hawkesbin.experiments import StudyConfig, run_study

config = StudyConfig(T_grid=(250, 500, 1000), delta_grid=(1, 2), replicates=20, seed=4)
table = run_study(config)
print(table.to_csv())
for (method, delta, param), slope in table.slopes.items():
    print(f"{method} delta={delta} {param}: log-log slope {slope:.2f}")
