#!/usr/bin/env python3
"""
Test file for the WSC Toolkit command line.
Exercises every command through click's test runner.
"""

import json
import os
import sys

import numpy as np
import pytest
from click.testing import CliRunner

# Add src to path for imports
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from main import cli, run
from src.domain.decoding import decode_pruned
from src.domain.distance import min_distance
from src.infrastructure.codebook_repository import CodebookRepository
from src.infrastructure.gaussian_generators import construct_with_distance, family_parameters
from src.infrastructure.json_repository import dumps
from src.infrastructure.rng import RngSpec

GEN = ['gen', '--family', 'wesc', '--m', '64', '--n', '8', '--k', '2', '--t', '1', '--d', '0.1', '--seed', '7']


def read_json(path):
    with open(path) as f:
        return json.load(f)


def read_text(path):
    with open(path) as f:
        return f.read()


class TestCLI:
    """Test the main CLI functionality."""

    def setup_method(self):
        """Set up test fixtures."""
        self.runner = CliRunner()

    def invoke(self, args):
        return self.runner.invoke(cli, args, env={"WSC_THREADS": "1", "WSC_OUTPUT_DIR": "."})

    def test_cli_help(self):
        result = self.invoke(['--help'])
        assert result.exit_code == 0
        assert 'WSC Toolkit' in result.output
        for command in ('gen', 'verify', 'decode', 'bounds', 'probe', 'simulate'):
            assert command in result.output

    def test_gen_help(self):
        result = self.invoke(['gen', '--help'])
        assert result.exit_code == 0
        assert '--family' in result.output
        assert '--seed' in result.output

    def test_gen_writes_codebook(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(GEN + ['--out', 'cb.txt'])
            assert result.exit_code == 0, result.output
            assert read_text('cb.txt').startswith('#wsc-codebook v1 m=64 n=8 norm=l2 nonneg=0 seed=7')

    def test_gen_verify_decode_round_trip(self):
        with self.runner.isolated_filesystem():
            assert self.invoke(GEN + ['--out', 'cb.txt']).exit_code == 0

            result = self.invoke(['verify', '--codebook', 'cb.txt', '--k', '2', '--t', '1', '--out', 'cert.json'])
            assert result.exit_code == 0, result.output
            certificate = read_json('cert.json')
            assert certificate['value'] >= 0.1
            assert certificate['exhaustive'] is True
            assert certificate['witness']['n'] == 8

            codebook = CodebookRepository().load('cb.txt')
            y = (codebook.values[:, 1] - codebook.values[:, 5]).tolist()
            with open('request.json', 'w') as f:
                json.dump({"y": y, "K": 2, "t": 1}, f)
            result = self.invoke(['decode', '--codebook', 'cb.txt', '--request', 'request.json', '--out', 'dec.json'])
            assert result.exit_code == 0, result.output
            decoded = read_json('dec.json')
            assert decoded['estimate'] == {"n": 8, "entries": [[1, 1], [5, -1]]}
            assert decoded['residual'] == pytest.approx(0.0, abs=1e-12)
            assert decoded['certified'] is True
            assert decoded['radius'] == pytest.approx(certificate['value'] / 2)

    def test_file_outputs_match_in_process_results(self):
        with self.runner.isolated_filesystem():
            assert self.invoke(GEN + ['--out', 'cb.txt']).exit_code == 0
            assert self.invoke(['verify', '--codebook', 'cb.txt', '--k', '2', '--t', '1',
                                '--out', 'cert.json']).exit_code == 0
            codebook, _ = construct_with_distance(family_parameters('wesc', 8, 64, 2, 0.1, 1), RngSpec(7),
                                                  max_attempts=20)
            y = (codebook.values[:, 0] + 0.3 * codebook.values[:, 6]).tolist()
            with open('request.json', 'w') as f:
                json.dump({"y": y, "K": 2, "t": 1}, f)
            assert self.invoke(['decode', '--codebook', 'cb.txt', '--request', 'request.json',
                                '--out', 'dec.json']).exit_code == 0

            CodebookRepository().save(codebook, 'in_process.txt')
            assert read_text('cb.txt') == read_text('in_process.txt')

            certificate = min_distance(codebook, 2, 1)
            expected = certificate.to_dict()
            expected.update({"K": 2, "t": 1, "seed": codebook.seed})
            assert read_text('cert.json') == dumps(expected)

            result = decode_pruned(codebook, np.asarray(y), 2, 1, radius=certificate.value / 2)
            assert read_text('dec.json') == dumps(result.to_dict())

    def test_stdout_carries_only_json(self):
        runner = CliRunner(mix_stderr=False)
        result = runner.invoke(cli, ['bounds', '--k', '100', '--d', '0.5', '--t', '1', '--delta', '0.5'],
                               env={"WSC_THREADS": "1"})
        assert result.exit_code == 0
        payload = json.loads(result.stdout)
        assert payload['delta'] == 0.5
        assert 'o_lb_Euclidean_1' in payload and 'o_lb_L1_WSC_1' in payload
        assert 'rate_ub_lp' in result.stderr

    def test_decode_inline_measurement(self):
        with self.runner.isolated_filesystem():
            assert self.invoke(GEN + ['--out', 'cb.txt']).exit_code == 0
            y = ','.join(repr(x) for x in CodebookRepository().load('cb.txt').values[:, 3])
            result = self.invoke(['decode', '--codebook', 'cb.txt', '--y', y, '--k', '2', '--t', '1',
                                  '--method', 'exhaustive', '--no-certify', '--out', 'dec.json'])
            assert result.exit_code == 0, result.output
            decoded = read_json('dec.json')
            assert decoded['estimate']['entries'] == [[3, 1]]
            assert decoded['radius'] is None

    def test_verify_threshold(self):
        with self.runner.isolated_filesystem():
            assert self.invoke(GEN + ['--out', 'cb.txt']).exit_code == 0
            result = self.invoke(['verify', '--codebook', 'cb.txt', '--k', '2', '--t', '1', '--d', '0.1',
                                  '--out', 'check.json'])
            assert result.exit_code == 0
            assert read_json('check.json')['holds'] is True

    def test_bounds_json(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(['bounds', '--k', '100', '--d', '0.5', '--t', '1', '--out', 'bounds.json'])
            assert result.exit_code == 0, result.output
            payload = read_json('bounds.json')
            assert payload['rate_ub_l2'] == pytest.approx(0.04394, abs=1e-5)
            assert 'o_ub_WSCs' in payload
            assert 'o_lb_ngL1WSC_2' in payload

    def test_bounds_stdout(self):
        result = self.invoke(['bounds', '--k', '100', '--d', '0.5', '--t', '1'])
        assert result.exit_code == 0
        assert '"rate_ub_l2"' in result.output
        assert 'rate_ub_lp' in result.output

    def test_probe(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(['probe', 'chi_square_tail', '--m', '64', '--delta', '0.5', '--trials', '2000',
                                  '--seed', '1', '--out', 'probe.json'])
            assert result.exit_code == 0, result.output
            report = read_json('probe.json')
            assert report['probe'] == 'chi_square_tail'
            assert report['pass'] is True
            assert report['bounds']['chernoff'] == pytest.approx(0.0971, abs=1e-4)

    def test_probe_missing_parameter(self):
        result = self.invoke(['probe', 'chi_square_tail', '--m', '64'])
        assert result.exit_code == 1
        assert '--delta' in result.output

    def test_simulate_inline(self):
        with self.runner.isolated_filesystem():
            result = self.invoke(['simulate', 'adder', '--trials', '50', '--seed', '2', '--out', 'sim.json'])
            assert result.exit_code == 0, result.output
            stats = read_json('sim.json')
            assert stats['scenario'] == 'adder'
            assert stats['rows'][0]['exact_recovery'] == 1.0

    def test_simulate_config_file(self):
        with self.runner.isolated_filesystem():
            config = {"n_targets": 5, "m": 24, "k_max": 1, "t": 2, "d": 0.05, "sigmas": [0.0, 0.01],
                      "trials": 40, "seed": 3}
            with open('config.json', 'w') as f:
                json.dump(config, f)
            result = self.invoke(['simulate', 'microarray', '--config', 'config.json', '--out', 'sim.json'])
            assert result.exit_code == 0, result.output
            assert len(read_json('sim.json')['rows']) == 2


class TestExitCodes:
    """Exit codes 1 (validation), 2 (budget) and 3 (construction)."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_validation_error(self):
        result = self.runner.invoke(cli, ['bounds', '--k', '1', '--d', '0.5', '--t', '1'])
        assert result.exit_code == 1
        assert 'K >= 2' in result.output

    def test_budget_exceeded(self):
        with self.runner.isolated_filesystem():
            assert self.runner.invoke(cli, GEN + ['--out', 'cb.txt']).exit_code == 0
            result = self.runner.invoke(cli, ['verify', '--codebook', 'cb.txt', '--k', '2', '--t', '1',
                                              '--max-signals', '1'])
            assert result.exit_code == 2
            assert 'budget' in result.output

    def test_construction_failure(self):
        with self.runner.isolated_filesystem():
            result = self.runner.invoke(cli, ['gen', '--m', '1', '--n', '3', '--k', '1', '--t', '1', '--d', '0.5',
                                              '--out', 'cb.txt'])
            assert result.exit_code == 3
            assert 'sphere' in result.output and 'packing' in result.output
            assert not os.path.exists('cb.txt')

    def test_malformed_codebook(self):
        with self.runner.isolated_filesystem():
            with open('cb.txt', 'w') as f:
                f.write('not a codebook\n')
            result = self.runner.invoke(cli, ['verify', '--codebook', 'cb.txt', '--k', '1', '--t', '1'])
            assert result.exit_code == 1

    def test_bad_environment(self):
        result = self.runner.invoke(cli, ['bounds', '--k', '100', '--d', '0.5', '--t', '1'],
                                    env={"WSC_THREADS": "zero"})
        assert result.exit_code == 1
        assert 'WSC_THREADS' in result.output

    def test_run_returns_codes(self):
        assert run(['bounds', '--k', '100', '--d', '0.5', '--t', '1']) == 0
        assert run(['bounds', '--k', '1', '--d', '0.5', '--t', '1']) == 1
        assert run(['bounds', '--k', 'many', '--d', '0.5', '--t', '1']) == 1
        assert run(['no-such-command']) == 1


class TestReproducibility:
    """Identical command lines give byte-identical outputs."""

    def setup_method(self):
        self.runner = CliRunner()

    def test_gen_is_byte_identical(self):
        with self.runner.isolated_filesystem():
            assert self.runner.invoke(cli, GEN + ['--out', 'a.txt']).exit_code == 0
            assert self.runner.invoke(cli, GEN + ['--out', 'b.txt']).exit_code == 0
            assert read_text('a.txt') == read_text('b.txt')

    def test_json_outputs_byte_identical_across_threads(self):
        with self.runner.isolated_filesystem():
            assert self.runner.invoke(cli, GEN + ['--out', 'cb.txt']).exit_code == 0
            verify = ['verify', '--codebook', 'cb.txt', '--k', '2', '--t', '2']
            assert self.runner.invoke(cli, verify + ['--threads', '1', '--out', 'a.json']).exit_code == 0
            assert self.runner.invoke(cli, verify + ['--threads', '4', '--out', 'b.json']).exit_code == 0
            assert read_text('a.json') == read_text('b.json')
            assert 'created_at' in read_json('a.json.meta.json')

    def test_probe_byte_identical(self):
        with self.runner.isolated_filesystem():
            probe = ['probe', 'l1_column_tail', '--m', '40', '--delta', '0.3', '--trials', '3000', '--seed', '5']
            assert self.runner.invoke(cli, probe + ['--out', 'a.json']).exit_code == 0
            assert self.runner.invoke(cli, probe + ['--out', 'b.json']).exit_code == 0
            assert read_text('a.json') == read_text('b.json')


class TestProjectStructure:
    """Test that the project structure is correct."""

    def test_required_files_exist(self):
        base_dir = os.path.dirname(os.path.dirname(__file__))
        required_files = [
            'main.py',
            'requirements.txt',
            'README.md',
            '.gitignore',
            'src/__init__.py',
            'config/__init__.py',
            'config/settings.py'
        ]
        for file_path in required_files:
            full_path = os.path.join(base_dir, file_path)
            assert os.path.exists(full_path), f"Required file {file_path} does not exist"

    def test_requirements_txt_has_dependencies(self):
        base_dir = os.path.dirname(os.path.dirname(__file__))
        with open(os.path.join(base_dir, 'requirements.txt'), 'r') as f:
            content = f.read()
        for dep in ['numpy', 'scipy', 'click', 'rich', 'python-dotenv', 'pytest']:
            assert dep in content, f"Expected dependency {dep} not found in requirements.txt"


if __name__ == '__main__':
    pytest.main([__file__])
