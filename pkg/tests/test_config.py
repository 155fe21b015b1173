import unittest
import os
import sys
import tempfile

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.config import Config
from src.errors import InvalidArgumentError


class TestConfig(unittest.TestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.missing = os.path.join(self.directory.name, 'missing.yaml')
        self.saved_env = {k: os.environ.pop(k) for k in list(os.environ) if k.startswith('TORIC_')}

    def tearDown(self):
        for key in [k for k in os.environ if k.startswith('TORIC_')]:
            del os.environ[key]
        os.environ.update(self.saved_env)
        self.directory.cleanup()

    def write(self, text):
        path = os.path.join(self.directory.name, 'config.yaml')
        with open(path, 'w') as file:
            file.write(text)
        return path

    def test_defaults_without_file(self):
        """Missing file falls back to the built-in defaults"""
        config = Config(self.missing)
        self.assertEqual(config.engine.box, 6)
        self.assertEqual(config.engine.k_max, 20)
        self.assertEqual(config.engine.saturation_max_power, 12)
        self.assertEqual(config.runner.jobs, 1)
        self.assertEqual(config.runner.output_format, 'table')
        self.assertEqual(config.random.seed, 42)

    def test_file_overrides_defaults(self):
        path = self.write("engine:\n  box: 3\nrunner:\n  output_format: structured\n")
        config = Config(path)
        self.assertEqual(config.engine.box, 3)
        self.assertEqual(config.engine.k_max, 20)
        self.assertEqual(config.runner.output_format, 'structured')

    def test_environment_beats_file(self):
        path = self.write("engine:\n  box: 3\n")
        os.environ['TORIC_BOX'] = '5'
        os.environ['TORIC_JOBS'] = '4'
        config = Config(path)
        self.assertEqual(config.engine.box, 5)
        self.assertEqual(config.runner.jobs, 4)

    def test_override_ignores_none(self):
        config = Config(self.missing).override(box=2, k_max=None, jobs=3)
        self.assertEqual(config.engine.box, 2)
        self.assertEqual(config.engine.k_max, 20)
        self.assertEqual(config.runner.jobs, 3)

    def test_invalid_values_rejected(self):
        config = Config(self.missing)
        with self.assertRaises(InvalidArgumentError):
            config.override(box=-1)
        with self.assertRaises(InvalidArgumentError):
            Config(self.missing).override(k_max=0)
        with self.assertRaises(InvalidArgumentError):
            Config(self.missing).override(output_format='html')
        with self.assertRaises(InvalidArgumentError):
            Config(self.missing).override(colour='blue')

    def test_to_dict_sections(self):
        data = Config(self.missing).to_dict()
        self.assertEqual(set(data), {'engine', 'runner', 'random'})
        self.assertEqual(data['engine']['chart_box'], 4)


if __name__ == '__main__':
    unittest.main()
