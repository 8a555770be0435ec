from setuptools import find_packages, setup

setup(
    name='hpdcfar',
    version='0.1.0',
    description='Riemannian means and medians of HPD matrices and matrix-CFAR radar detection in JAX',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=('examples', 'examples.*')),
    python_requires='>=3.8',
    install_requires=[
        'jax',
        'jaxlib',
        'pyyaml',
        'tqdm',
    ],
    entry_points={
        'console_scripts': ['hpdcfar=hpdcfar.cli:main'],
    },
)
