// expect: race_free
// allow: unknown
#include <pthread.h>
int g;
void *worker(void *p) {
  int x = g;
  return NULL;
}
int main() {
  pthread_t t[2];
  for (int i = 0; i < 2; i++)
    pthread_create(&t[i], NULL, worker, NULL);
  for (int i = 0; i < 2; i++)
    pthread_join(t[i], NULL);
  g = 1;
  return 0;
}
