import os
from setuptools import setup

with open(os.path.join(os.path.dirname(__file__), 'README.md')) as readme:
    README = readme.read()

# allow setup.py to be run from any path
os.chdir(os.path.normpath(os.path.join(os.path.abspath(__file__), os.pardir)))

setup(
    name='hdcpf',
    version='0.3',
    packages=['hdcpf'],
    package_data={
        'hdcpf': ['data/*.json', 'data/netlists/*.netlist',
                  'data/transcripts/*.txt'],
    },
    license='BSD License',
    description='Simulator for a heralded high-dimensional controlled '
                'phase-flip gate on photonic OAM qudits.',
    long_description=README,
    long_description_content_type='text/markdown',
    classifiers=[
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: BSD License',
        'Operating System :: OS Independent',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    python_requires='>=3.7',
    install_requires=[
        'numpy>=1.17',
        'scipy>=1.4',
        'termcolor',
    ],
    entry_points={
        'console_scripts': ['hdcpf = hdcpf.cli:main'],
    },
)
