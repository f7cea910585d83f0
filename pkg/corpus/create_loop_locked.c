// expect: race_free
// allow: unknown
#include <pthread.h>
int hits;
pthread_mutex_t m;
void *worker(void *arg) {
  pthread_mutex_lock(&m);
  hits++;
  pthread_mutex_unlock(&m);
  return NULL;
}
int main() {
  pthread_t t[2];
  for (int i = 0; i < 2; i++)
    pthread_create(&t[i], NULL, worker, NULL);
  return 0;
}
