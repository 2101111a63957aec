# Generated by Django 5.2.10 on 2026-10-19 14:37

from django.db import migrations, models


class Migration(migrations.Migration):

    dependencies = [
        ('ranking', '0001_initial'),
    ]

    operations = [
        migrations.AddField(
            model_name='experimentrecord',
            name='correct_fraction',
            field=models.FloatField(default=0.0, help_text='Share of all queries answered correctly'),
        ),
        migrations.AddField(
            model_name='experimentrecord',
            name='correct_bound',
            field=models.FloatField(default=0.0, help_text='Guaranteed share of correct answers'),
        ),
        migrations.AddField(
            model_name='experimentrecord',
            name='inversions',
            field=models.FloatField(default=0.0, help_text='Mean within-domain share of inverted pairs'),
        ),
        migrations.AddField(
            model_name='experimentrecord',
            name='bad_edges',
            field=models.IntegerField(default=0),
        ),
        migrations.AddField(
            model_name='experimentrecord',
            name='bad_edge_bound',
            field=models.FloatField(default=0.0),
        ),
        migrations.AddField(
            model_name='experimentrecord',
            name='baseline_intra_backward',
            field=models.IntegerField(default=0, help_text='Intra-domain backward edges of the global QuickSort ordering'),
        ),
    ]
