"""
Management command to build and verify gadget tournaments.

Usage:
    python manage.py gadget make --qr 7 --ku 2 --verify exhaustive --out gadgets/qr7.txt
    python manage.py gadget make --random 21 --seed 3 --ku 3 --verify sampled --trials 50000
    python manage.py gadget verify gadgets/qr7.txt --ku 2
    python manage.py gadget size --ku 2 --p 0.5
"""
from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from ranking.gadget import (
    DEFAULT_SAMPLED_TRIALS,
    gadget_success_bound,
    min_gadget_size,
    quadratic_residue_gadget,
    random_gadget,
    read_gadget,
    verify_gadget,
    write_gadget,
)
from ranking.management.base import EXIT_PIPELINE, RankingCommand


class Command(RankingCommand):
    help = 'Build, verify and size gadget tournaments'

    def add_arguments(self, parser):
        actions = parser.add_subparsers(dest='action', required=True)

        make = actions.add_parser('make', help='Build a gadget')
        kind = make.add_mutually_exclusive_group(required=True)
        kind.add_argument('--qr', type=int, help='Quadratic residue tournament on Z_p (p prime, 3 mod 4)')
        kind.add_argument('--random', type=int, help='Uniform random tournament of this order')
        make.add_argument('--seed', type=int, default=None)
        make.add_argument('--ku', type=int, default=2, help='Bound on the number of domains')
        make.add_argument('--verify', choices=['exhaustive', 'sampled', 'none'], default='none')
        make.add_argument('--trials', type=int, default=DEFAULT_SAMPLED_TRIALS)
        make.add_argument('--out', help='Write the gadget file here')

        verify = actions.add_parser('verify', help='Verify a gadget file')
        verify.add_argument('path')
        verify.add_argument('--ku', type=int, default=2)
        verify.add_argument('--mode', choices=['exhaustive', 'sampled'], default='exhaustive')
        verify.add_argument('--trials', type=int, default=DEFAULT_SAMPLED_TRIALS)
        verify.add_argument('--seed', type=int, default=None)

        size = actions.add_parser('size', help='Smallest random-gadget order for a success probability')
        size.add_argument('--ku', type=int, default=2)
        size.add_argument('--p', type=float, default=0.5)

    def handle(self, *args, **options):
        action = options['action']
        if action == 'make':
            self._make(options)
        elif action == 'verify':
            self._verify(options)
        else:
            h = min_gadget_size(options['ku'], options['p'])
            self.stdout.write(self.style.SUCCESS(
                f'h={h} (bound at h: {gadget_success_bound(h, options["ku"]):.4f})'
            ))

    def _make(self, options):
        if options['qr'] is not None:
            gadget = quadratic_residue_gadget(options['qr'])
        else:
            gadget = random_gadget(options['random'], options['seed'])
        self.stdout.write(f'Built {gadget.name} (h={gadget.h})')

        if options['verify'] != 'none':
            verdict = self._check(gadget, options['ku'], options['verify'], options['trials'], options['seed'])
            gadget = verdict.gadget

        if options.get('out'):
            out = Path(options['out'])
            out.parent.mkdir(parents=True, exist_ok=True)
            with open(out, 'w') as f:
                write_gadget(gadget, f)
            self.stdout.write(self.style.SUCCESS(f'Wrote {out} (verified={gadget.verified.value})'))

    def _verify(self, options):
        with open(options['path']) as f:
            gadget = read_gadget(f)
        self._check(gadget, options['ku'], options['mode'], options['trials'], options['seed'])

    def _check(self, gadget, k_u, mode, trials, seed):
        verdict = verify_gadget(gadget, k_u, mode=mode, trials=trials, seed=seed,
                                subset_limit=settings.RANKING_EXHAUSTIVE_SUBSET_LIMIT)
        if not verdict.ok:
            subset = ' '.join(str(v) for v in verdict.counterexample)
            self.stdout.write(self.style.WARNING(f'Counterexample (transitive subset): {subset}'))
            raise CommandError(
                f'{gadget.name or "gadget"} is not a gadget for k_u={k_u}', returncode=EXIT_PIPELINE
            )
        self.stdout.write(self.style.SUCCESS(
            f'Verified ({mode}) for k_u={k_u} over {verdict.subsets_checked} subsets'
        ))
        return verdict
