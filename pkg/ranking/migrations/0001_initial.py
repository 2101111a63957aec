# Generated by Django 5.2.10 on 2026-10-19 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('label', models.CharField(blank=True, default='', max_length=200)),
                ('mode', models.CharField(choices=[('planted', 'Planted partition'), ('voting', 'Majority voting')], default='planted', max_length=10)),
                ('config', models.JSONField(default=dict, help_text='Experiment config the row was produced with')),
                ('seed', models.IntegerField()),
                ('n', models.IntegerField()),
                ('k', models.IntegerField()),
                ('ratio', models.FloatField()),
                ('p_succ', models.FloatField()),
                ('eps_config', models.FloatField()),
                ('eps_clust', models.FloatField(help_text='Generalization error of the clustered ranking')),
                ('eps_baseline', models.FloatField(help_text='Generalization error of one global QuickSort ordering')),
                ('coverage', models.FloatField()),
                ('min_purity', models.FloatField()),
                ('reconstructed', models.FloatField(default=0.0)),
                ('cluster_count', models.IntegerField()),
                ('find_runs', models.IntegerField()),
                ('copies_found', models.IntegerField()),
                ('budget', models.IntegerField(default=0)),
                ('wall_ms', models.IntegerField()),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['label', 'seed', 'budget'],
                'indexes': [models.Index(fields=['label', 'seed'], name='ranking_exp_label_0b6f2c_idx')],
            },
        ),
    ]
