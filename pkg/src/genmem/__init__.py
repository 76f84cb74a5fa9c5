"""Evolved MLP controllers for a T-maze light-cue task, adapted at runtime by
fitness-modulated Hebbian plasticity that is discarded after every trial."""
from .evolution import EvolutionRecord, GaConfig, evaluate, evolve, training_mazes
from .fitness import (FitnessSample, behavior_components, combined_fitness, final_fitness, goal_reward,
                      trial_fitness)
from .harness import ExperimentConfig, TrialSpec, correlation_report, run_experiment
from .network import (ControllerState, Genotype, NetworkTopology, forward, genotype_length, load_genome,
                      load_genotype, save_genome)
from .plasticity import (PlasticityConfig, PlasticityState, apply_update, begin_trial, effective_rate,
                         end_trial, update_traces)
from .trial import TrialMetrics, TrialOutcome, WeightChangeLog, run_trial
from .world import MazeSpec, SensorFrame, SimConfig, WorldState, load_world, sense, step, t_maze

__version__ = "0.1.0"
