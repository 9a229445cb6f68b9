"""
Jeux de données: blobs synthétiques, lecture CSV, partition Dirichlet
"""
from .dataset import ClientDataset, Dataset, PartitionSpec, standardize_clients
from .synthetic import class_means, synth_blobs
from .partition import dirichlet_partition, export_partition, mean_label_skew, partition_table
from .csv_loader import load_csv
