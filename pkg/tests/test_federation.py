"""
Tests de l'état fédéré, des calculs serveur, du canal instrumenté et du moteur
"""
import numpy as np
import pytest

from algorithms.registry import FEDAVG, LOCAL, PGFED, PGFED_CE, PGFEDMO, build_algorithm
from analyzers.comm_ledger import CommLedger, ledger_charge
from core.checkpoint import load_checkpoint, restore_simulation, save_checkpoint
from core.engine import Simulation, server_round
from core.errors import ClientUpdateError, NonFiniteError
from core.federation import (
    ServerState, aggregate_global, compute_aux_grad, compute_mean_grad, g_alpha1,
    init_client_states, init_server_state, select_clients,
)
from core.wire import Wire
from generators.dataset import ClientDataset

from conftest import make_clients, make_federation


def build(tag, clients, spec, **overrides):
    config = make_federation(tag, **overrides)
    return Simulation(spec, config, build_algorithm(tag, spec, config), clients)


class TestFederationConfig:

    def test_clients_per_round_rounds_half_up(self):
        assert make_federation(n_clients=100, sample_rate=0.25).clients_per_round == 25
        assert make_federation(n_clients=10, sample_rate=0.25).clients_per_round == 3
        assert make_federation(n_clients=6, sample_rate=0.25).clients_per_round == 2

    def test_validation_messages(self):
        errors = dict(make_federation(beta=1.5, sample_rate=0.0, n_clients=1).validate())
        assert errors["beta"] == "beta in [0,1)"
        assert errors["sample_rate"] == "sample_rate in (0,1]"
        assert errors["n_clients"] == "n_clients >= 2"

    def test_too_small_sample_rate(self):
        errors = dict(make_federation(n_clients=4, sample_rate=0.1).validate())
        assert "sample_rate" in errors


class TestSelectClients:

    def test_deterministic_sorted_distinct(self):
        plan = select_clients(seed=3, t=5, n_clients=20, clients_per_round=5)
        assert plan == select_clients(seed=3, t=5, n_clients=20, clients_per_round=5)
        assert list(plan.selected) == sorted(set(plan.selected))
        assert len(plan.selected) == 5

    def test_exhaustive(self):
        assert select_clients(1, 1, 4, 4).selected == (0, 1, 2, 3)

    def test_rounds_differ(self):
        plans = {select_clients(0, t, 20, 5).selected for t in range(1, 20)}
        assert len(plans) > 1

    def test_invalid_m(self):
        with pytest.raises(ValueError):
            select_clients(0, 1, 4, 5)


class TestServerAggregates:

    def test_aggregate_midpoint(self):
        result = aggregate_global([(np.array([0.0, 0.0]), 5), (np.array([2.0, 2.0]), 5)])
        np.testing.assert_allclose(result, [1.0, 1.0])

    def test_aggregate_singleton(self):
        theta = np.array([0.3, -0.2])
        np.testing.assert_array_equal(aggregate_global([(theta, 7)]), theta)

    def test_aggregate_weights_by_n_train(self):
        result = aggregate_global([(np.array([0.0]), 1), (np.array([4.0]), 3)])
        np.testing.assert_allclose(result, [3.0])

    def test_aggregate_empty(self):
        with pytest.raises(ValueError):
            aggregate_global([])

    def test_aux_grad_weights(self):
        grads = {1: np.array([1.0, 0.0]), 4: np.array([0.0, 2.0])}
        result = compute_aux_grad({1: 0.5, 4: 0.25}, grads, mu=0.1)
        np.testing.assert_allclose(result, [0.05, 0.05])

    def test_aux_grad_mu_zero_is_zero(self):
        grads = {0: np.array([3.0, -1.0])}
        np.testing.assert_array_equal(compute_aux_grad({0: 0.7}, grads, mu=0.0), [0.0, 0.0])

    def test_mean_grad(self):
        grads = {0: np.array([1.0, 1.0]), 2: np.array([3.0, -1.0])}
        np.testing.assert_allclose(compute_mean_grad(grads, mu=0.5), [1.0, 0.0])

    def test_g_alpha1(self):
        value = g_alpha1(0.1, 2.0, np.array([1.0, 2.0]), np.array([0.5, 0.25]))
        assert value == pytest.approx(0.1 * (2.0 - 1.0))

    def test_g_alpha1_non_finite(self):
        with pytest.raises(NonFiniteError):
            g_alpha1(0.1, float("inf"), np.zeros(2), np.zeros(2))


class TestInitialState:

    def test_alpha_initialized_to_one_over_m(self, small_clients, linear_spec):
        config = make_federation(n_clients=8, sample_rate=0.5)
        theta0 = np.zeros(linear_spec.dim)
        server = init_server_state(theta0, 8, config.clients_per_round)
        clients = init_client_states(small_clients, theta0, config)
        assert (server.A == 0.25).all()
        for client in clients.values():
            assert set(client.alpha_row) == set(range(8))
            assert all(value == 0.25 for value in client.alpha_row.values())
            assert client.aux_grad is None


class TestWire:

    def test_counts_models_and_scalars(self):
        wire = Wire(dim=3)
        wire.download({"theta_glob": np.zeros(3), "g1_map": {0: 1.0, 2: 0.5}, "g2_const": 0.1})
        wire.upload({"theta": np.zeros(3), "full_grad": np.zeros(3), "g_alpha1": 0.2, "alpha": {}})
        assert wire.ledger() == CommLedger(1, 2, 3, 1)

    def test_received_objects_are_copies(self):
        wire = Wire(dim=2)
        theta = np.zeros(2)
        received = wire.download({"theta_glob": theta})
        received["theta_glob"][0] = 5.0
        assert theta[0] == 0.0

    def test_rejects_foreign_shapes(self):
        with pytest.raises(TypeError):
            Wire(dim=2).upload({"matrix": np.zeros((2, 2))})


class TestServerRound:

    def test_local_has_no_traffic(self, small_clients, linear_spec):
        simulation = build(LOCAL, small_clients, linear_spec)
        simulation.run(3)
        assert simulation.ledger.total == CommLedger()
        assert all(record.traffic == CommLedger() for record in simulation.history)

    @pytest.mark.parametrize("tag", [FEDAVG, PGFED, PGFEDMO, PGFED_CE])
    def test_engine_traffic_matches_ledger(self, small_clients, linear_spec, tag):
        simulation = build(tag, small_clients, linear_spec)
        M = simulation.config.clients_per_round
        simulation.run(4)
        for t, delta in enumerate(simulation.ledger.per_round, start=1):
            assert delta == ledger_charge(tag, t, M)

    def test_frozen_clients_unchanged(self, small_clients, linear_spec):
        simulation = build(PGFEDMO, small_clients, linear_spec)
        simulation.run(1)
        before = {i: (c.theta.copy(), c.aux_grad) for i, c in simulation.clients.items()}
        record = simulation.step()
        for i, (theta, aux) in before.items():
            if i not in record.selected:
                np.testing.assert_array_equal(simulation.clients[i].theta, theta)
                assert simulation.clients[i].aux_grad is aux

    def test_protocol_key_sets(self, small_clients, linear_spec):
        simulation = build(PGFED, small_clients, linear_spec)
        for _ in range(4):
            record = simulation.step()
            server = simulation.server
            assert set(server.prev_grads) == set(record.selected)
            assert set(server.prev_g1) == set(record.selected)
            assert server.prev_selected == record.selected

    def test_symmetric_clients_converge_together(self, linear_spec):
        # Given: 4 clients aux données identiques, tous sélectionnés, batch = jeu complet
        base = make_clients(n_clients=4, n_samples=160, alpha=1.0, seed=2)[0]
        clients = [ClientDataset(i, base.train, base.test) for i in range(4)]
        config = make_federation(FEDAVG, n_clients=4, sample_rate=1.0, batch_size=10_000)
        algorithm = build_algorithm(FEDAVG, linear_spec, config)
        simulation = Simulation(linear_spec, config, algorithm, clients)

        # When
        simulation.run(2)

        # Then
        thetas = [simulation.clients[i].theta for i in range(4)]
        assert not np.array_equal(thetas[0], simulation.theta0)
        for theta in thetas[1:]:
            assert np.abs(theta - thetas[0]).max() <= 1e-9
        np.testing.assert_allclose(simulation.server.theta_glob, np.mean(thetas, axis=0), atol=1e-12)

    def test_server_round_returns_new_state(self, small_clients, linear_spec):
        config = make_federation(FEDAVG)
        algorithm = build_algorithm(FEDAVG, linear_spec, config)
        theta0 = np.zeros(linear_spec.dim)
        server = init_server_state(theta0, 8, config.clients_per_round)
        clients = init_client_states(small_clients, theta0, config)
        new_server, record = server_round(server, clients, config, algorithm)
        assert isinstance(new_server, ServerState)
        assert new_server.round == 1 and server.round == 0
        assert record.round == 1
        assert len(record.per_client_test_acc) == 8

    def test_client_failure_names_the_client(self, small_clients, linear_spec):
        config = make_federation(FEDAVG, eta1=1e308, momentum=0.0, local_epochs=3)
        algorithm = build_algorithm(FEDAVG, linear_spec, config)
        simulation = Simulation(linear_spec, config, algorithm, small_clients)
        with pytest.raises(ClientUpdateError) as info:
            simulation.step()
        assert info.value.client_id in select_clients(config.seed, 1, 8, config.clients_per_round).selected
        assert info.value.round_index == 1

    def test_parallel_workers_are_deterministic(self, small_clients, linear_spec):
        serial = build(PGFED, small_clients, linear_spec)
        config = make_federation(PGFED)
        parallel = Simulation(linear_spec, config, build_algorithm(PGFED, linear_spec, config),
                              small_clients, max_workers=4)
        serial.run(3)
        parallel.run(3)
        np.testing.assert_array_equal(serial.server.A, parallel.server.A)
        for i in range(8):
            np.testing.assert_array_equal(serial.clients[i].theta, parallel.clients[i].theta)


class TestCheckpoint:

    def test_resume_is_bit_identical(self, small_clients, linear_spec, tmp_path):
        # Given: un run continu et un run interrompu au round 2
        reference = build(PGFEDMO, small_clients, linear_spec)
        reference.run(5)
        interrupted = build(PGFEDMO, small_clients, linear_spec)
        interrupted.run(2)
        json_path, _ = save_checkpoint(interrupted, str(tmp_path))

        # When
        resumed = build(PGFEDMO, small_clients, linear_spec)
        restore_simulation(resumed, load_checkpoint(json_path))
        resumed.run(5)

        # Then
        np.testing.assert_array_equal(resumed.server.theta_glob, reference.server.theta_glob)
        np.testing.assert_array_equal(resumed.server.A, reference.server.A)
        assert resumed.history == reference.history
        assert resumed.ledger.total == reference.ledger.total
        for i in range(8):
            np.testing.assert_array_equal(resumed.clients[i].theta, reference.clients[i].theta)

    def test_incompatible_checkpoint(self, small_clients, linear_spec, tmp_path):
        simulation = build(PGFED, small_clients, linear_spec)
        simulation.run(1)
        json_path, _ = save_checkpoint(simulation, str(tmp_path))
        other = build(FEDAVG, small_clients, linear_spec)
        with pytest.raises(Exception):
            restore_simulation(other, load_checkpoint(json_path))

    def test_checkpoint_names(self, small_clients, linear_spec, tmp_path):
        simulation = build(FEDAVG, small_clients, linear_spec)
        simulation.run(3)
        json_path, npz_path = save_checkpoint(simulation, str(tmp_path))
        assert json_path.endswith("checkpoint-r0003.json")
        assert npz_path.endswith("checkpoint-r0003.npz")
