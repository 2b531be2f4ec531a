from pathlib import Path
from setuptools import setup, find_packages

cwd = Path(__file__).resolve().parent
requirements = [
    line.strip() for line in (cwd / 'requirements.txt').read_text().split('\n')
    if line.strip() and not line.startswith('pytest')
]

setup_args = dict(
    name='penstock_mpc',
    version='0.1',
    description='Stress-informed MPC and fatigue analysis for hydropower penstocks',
    packages=find_packages(exclude=['tests']),
    package_data={'penstock_mpc': ['plant_230mw.toml']},
    python_requires='>=3.10',
    install_requires=requirements,
    entry_points={'console_scripts': ['penstock-mpc=penstock_mpc.cli:cli_main']},
    )

if __name__ == "__main__":
    setup(**setup_args)
